//! Summary statistics over request logs.

use fncap_core::stats::percentile_nearest_rank;

use crate::error::LoadError;
use crate::log::{RequestRecord, RequestStatus};

/// Nearest-rank percentile of execution duration over ok requests.
/// `p` is a fraction in `(0, 1]`.
pub fn percentile(records: &[RequestRecord], p: f64) -> Result<f64, LoadError> {
    let durations: Vec<f64> = records
        .iter()
        .filter(|r| r.status == RequestStatus::Ok)
        .filter_map(|r| r.exec_ms)
        .collect();
    percentile_nearest_rank(&durations, p).ok_or(LoadError::EmptyWindow)
}

/// Offered-versus-served summary of a set of requests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Throughput {
    /// Successful requests per second over the window.
    pub ok_rps: f64,
    /// Throttled requests as a fraction of all requests (0 when empty).
    pub throttle_fraction: f64,
    pub total: usize,
    pub ok: usize,
    pub throttled: usize,
    /// Timeouts plus transport errors.
    pub failed: usize,
}

/// Count outcomes over a window of `window_s` seconds. Callers slice the
/// log to the window first (see [`crate::RequestLog::slice`]).
pub fn throughput(records: &[RequestRecord], window_s: f64) -> Throughput {
    assert!(window_s > 0.0, "window must have positive length");
    let total = records.len();
    let ok = records.iter().filter(|r| r.status == RequestStatus::Ok).count();
    let throttled = records.iter().filter(|r| r.status == RequestStatus::Throttled).count();
    Throughput {
        ok_rps: ok as f64 / window_s,
        throttle_fraction: if total == 0 { 0.0 } else { throttled as f64 / total as f64 },
        total,
        ok,
        throttled,
        failed: total - ok - throttled,
    }
}
