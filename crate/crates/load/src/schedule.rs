//! Staged VU schedules.

use crate::error::LoadError;

/// One stage of a load schedule: ramp the VU pool linearly from wherever the
/// previous stage left it to `target_vus` over `duration_s`. A stage whose
/// target equals the current level holds it steady.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadStage {
    pub duration_s: f64,
    pub target_vus: u32,
}

impl LoadStage {
    pub fn new(duration_s: f64, target_vus: u32) -> Self {
        LoadStage { duration_s, target_vus }
    }
}

/// The default two-stage shape: ramp up over the first tenth of the test,
/// hold for the rest.
pub fn ramp_and_hold(total_duration_s: f64, target_vus: u32) -> Vec<LoadStage> {
    let ramp = total_duration_s * 0.1;
    vec![LoadStage::new(ramp, target_vus), LoadStage::new(total_duration_s - ramp, target_vus)]
}

/// Per-VU activation windows derived from a stage list.
///
/// During an upward ramp from `prev` to `target`, VU `k` (1-based,
/// `prev < k <= target`) starts at the instant the interpolated level
/// reaches `k - 1`, so the first new VU starts the moment the ramp begins.
/// Downward ramps release VUs on the mirrored schedule; a released VU
/// finishes its in-flight request and parks.
#[derive(Debug, Clone)]
pub struct VuPlan {
    pub start_ms: f64,
    pub end_ms: f64,
    pub max_vus: u32,
    /// Every activation, sorted by time: `(time, vu)` with `vu` 1-based.
    pub starts: Vec<(f64, u32)>,
    /// Active windows per VU, index `vu - 1`.
    intervals: Vec<Vec<(f64, f64)>>,
}

impl VuPlan {
    pub fn build(stages: &[LoadStage], start_ms: f64) -> Result<VuPlan, LoadError> {
        if stages.is_empty() || stages.iter().any(|s| s.duration_s <= 0.0) {
            return Err(LoadError::InvalidStages);
        }
        let max_vus = stages.iter().map(|s| s.target_vus).max().unwrap_or(0);
        let mut starts: Vec<(f64, u32)> = Vec::new();
        let mut intervals: Vec<Vec<(f64, f64)>> = vec![Vec::new(); max_vus as usize];
        let mut open: Vec<Option<f64>> = vec![None; max_vus as usize];
        let mut cursor = start_ms;
        let mut level = 0u32;
        for stage in stages {
            let dur = stage.duration_s * 1000.0;
            let target = stage.target_vus;
            if target > level {
                for k in level + 1..=target {
                    let at = cursor + dur * f64::from(k - 1 - level) / f64::from(target - level);
                    starts.push((at, k));
                    open[(k - 1) as usize] = Some(at);
                }
            } else if target < level {
                for k in target + 1..=level {
                    let at = cursor + dur * f64::from(level - k) / f64::from(level - target);
                    let opened = open[(k - 1) as usize].take().expect("vu was active");
                    intervals[(k - 1) as usize].push((opened, at));
                }
            }
            cursor += dur;
            level = target;
        }
        for (idx, opened) in open.into_iter().enumerate() {
            if let Some(at) = opened {
                intervals[idx].push((at, cursor));
            }
        }
        starts.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite times").then(a.1.cmp(&b.1)));
        Ok(VuPlan { start_ms, end_ms: cursor, max_vus, starts, intervals })
    }

    /// Whether VU `k` (1-based) may start a new request at time `t`.
    pub fn is_active(&self, vu: u32, t: f64) -> bool {
        self.intervals
            .get((vu - 1) as usize)
            .is_some_and(|windows| windows.iter().any(|(a, b)| t >= *a && t < *b))
    }

    /// Half-open `[from, to)` windows during which VU `k` (1-based) runs.
    pub fn active_intervals(&self, vu: u32) -> &[(f64, f64)] {
        self.intervals.get((vu - 1) as usize).map_or(&[], Vec::as_slice)
    }
}
