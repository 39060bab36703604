//! Windowed aggregation of platform state into metric samples.

use fncap_core::stats::{mean, percentile_nearest_rank};
use fncap_sim::rng::fnv1a;
use fncap_sim::{timeline_max, Platform, Status};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::MetricsError;

/// One sampling window of monitoring signals for one function.
///
/// Execution-duration fields are `None` for windows with no successful
/// invocations; everything else is well defined even when idle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSample {
    pub function: String,
    pub window_start_ms: f64,
    /// Peak simultaneously-live instances inside the window.
    pub concurrent_instances: u32,
    /// Successful invocations completing inside the window.
    pub invocations: u64,
    pub exec_mean_ms: Option<f64>,
    pub exec_p50_ms: Option<f64>,
    pub exec_p95_ms: Option<f64>,
    /// Observed memory footprint, MiB. Synthesized from the profile's
    /// utilization fraction; never exceeds the allocation.
    pub memory_usage_mib: f64,
    pub allocated_memory_mib: u32,
    pub function_concurrency: u32,
}

/// Aggregate one closed window `[window_start, window_start + interval)`.
///
/// Invocations are attributed to the window their response lands in, so
/// per-window counts sum to the total across a tiled series.
pub fn sample(
    platform: &Platform,
    function: &str,
    window_start_ms: f64,
    interval_ms: f64,
) -> Result<MetricsSample, MetricsError> {
    if interval_ms <= 0.0 {
        return Err(MetricsError::InvalidInterval(interval_ms));
    }
    let end_ms = window_start_ms + interval_ms;
    if end_ms > platform.clock_ms() {
        return Err(MetricsError::OpenWindow { end_ms, clock_ms: platform.clock_ms() });
    }
    let missing = || MetricsError::UnknownFunction(function.to_string());
    let config = platform.config(function).ok_or_else(missing)?;
    let profile = platform.profile(function).ok_or_else(missing)?;
    let outcomes = platform.outcomes(function).ok_or_else(missing)?;
    let timeline = platform.instance_timeline(function).ok_or_else(missing)?;

    let durations: Vec<f64> = outcomes
        .iter()
        .filter(|o| o.done_ms >= window_start_ms && o.done_ms < end_ms)
        .filter(|o| o.outcome.status == Status::Ok)
        .filter_map(|o| o.outcome.execution_ms)
        .collect();

    let concurrent_instances =
        timeline_max(timeline, window_start_ms, end_ms).max(0) as u32;

    // The simulator executes no real code, so memory usage is modeled: the
    // profile's utilization fraction of the allocation, with a trace of
    // seeded per-window jitter so the feature is not perfectly collinear
    // with allocated_memory. Idle windows report zero.
    let memory_usage_mib = if concurrent_instances == 0 {
        0.0
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(
            platform.seed() ^ fnv1a(function.as_bytes()) ^ window_start_ms.to_bits(),
        );
        let jitter: f64 = rng.random_range(0.0..0.05);
        let alloc = f64::from(config.memory_mib);
        (alloc * profile.memory_utilization * (1.0 + jitter)).min(alloc)
    };

    Ok(MetricsSample {
        function: function.to_string(),
        window_start_ms,
        concurrent_instances,
        invocations: durations.len() as u64,
        exec_mean_ms: mean(&durations),
        exec_p50_ms: percentile_nearest_rank(&durations, 0.50),
        exec_p95_ms: percentile_nearest_rank(&durations, 0.95),
        memory_usage_mib,
        allocated_memory_mib: config.memory_mib,
        function_concurrency: config.concurrency,
    })
}

/// Sample every full window tiling `[start_ms, end_ms)`. Windows are back to
/// back with no gaps; a trailing remainder shorter than the interval is
/// dropped rather than reported as a partial window.
pub fn collect_series(
    platform: &Platform,
    function: &str,
    start_ms: f64,
    end_ms: f64,
    interval_ms: f64,
) -> Result<Vec<MetricsSample>, MetricsError> {
    if interval_ms <= 0.0 {
        return Err(MetricsError::InvalidInterval(interval_ms));
    }
    let count = ((end_ms - start_ms) / interval_ms + 1e-9).floor() as usize;
    (0..count)
        .map(|k| sample(platform, function, start_ms + k as f64 * interval_ms, interval_ms))
        .collect()
}
