//! The memory/speed curve of a simulated function.

use fncap_core::FunctionProfile;

/// Mean service time at a given memory allocation.
///
/// Service time shrinks inversely with memory until the profile's saturation
/// point and stays flat beyond it: doubling memory halves the duration while
/// the function is memory-bound, and buys nothing once it no longer is.
pub fn duration_model(profile: &FunctionProfile, memory_mib: u32) -> f64 {
    debug_assert!(memory_mib >= 128, "memory below the 128 MiB platform minimum");
    let saturation = profile.saturation_memory_mib as f64;
    let effective = (memory_mib as f64).min(saturation);
    profile.base_duration_ms * saturation / effective
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile() -> FunctionProfile {
        FunctionProfile::new("f", 400.0).with_saturation_memory(2048)
    }

    #[test]
    fn pre_saturation_is_inverse_in_memory() {
        assert_eq!(duration_model(&profile(), 256), 3200.0);
        assert_eq!(duration_model(&profile(), 512), 1600.0);
        assert_eq!(duration_model(&profile(), 1024), 800.0);
    }

    #[test]
    fn flat_past_saturation() {
        assert_eq!(duration_model(&profile(), 2048), 400.0);
        assert_eq!(duration_model(&profile(), 4096), 400.0);
        assert_eq!(duration_model(&profile(), 10240), 400.0);
    }

    #[test]
    fn exactly_base_at_saturation() {
        let p = FunctionProfile::new("f", 123.0).with_saturation_memory(1024);
        assert_eq!(duration_model(&p, 1024), 123.0);
    }
}
