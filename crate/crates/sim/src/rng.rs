//! Seed derivation for per-function random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// FNV-1a, hand-rolled because [`std::hash::DefaultHasher`] makes no
/// stability promise across releases and the seeds derived here must stay
/// reproducible.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Every deployment draws service-time noise from its own stream so that
/// adding or removing one function never shifts the durations of another.
pub fn deployment_rng(platform_seed: u64, function: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(platform_seed ^ fnv1a(function.as_bytes()))
}
