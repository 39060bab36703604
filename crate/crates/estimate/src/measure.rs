//! Measured capacity: an SLO-bounded binary search over closed-loop load
//! levels on the simulator.

use fncap_core::Slo;
use fncap_load::{percentile, ramp_and_hold, run_load, throughput, LoadOptions};
use fncap_sim::Platform;

use crate::capacity::{CapacityEstimate, Method};
use crate::error::EstimateError;

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureOptions {
    /// Search bracket in virtual users.
    pub vu_low: u32,
    pub vu_high: u32,
    /// Length of each probe run; the first 10% is ramp and is discarded.
    pub probe_duration_s: f64,
    /// Highest tolerable fraction of throttled requests at a passing level.
    pub throttle_budget: f64,
    /// Stop when the unresolved VU bracket is below this fraction of the
    /// passing level.
    pub resolution: f64,
    pub payload: Vec<u8>,
}

impl Default for MeasureOptions {
    fn default() -> Self {
        Self {
            vu_low: 1,
            vu_high: 300,
            probe_duration_s: 120.0,
            throttle_budget: 0.01,
            resolution: 0.05,
            payload: b"{}".to_vec(),
        }
    }
}

/// One load level tried during the search.
#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub vus: u32,
    /// Successful requests per second over the steady-state window.
    pub ok_rps: f64,
    /// p-th percentile execution duration at the SLO's percentile; absent
    /// when nothing succeeded.
    pub exec_percentile_ms: Option<f64>,
    pub throttle_fraction: f64,
    pub passed: bool,
}

/// The search result: the estimate plus every probe that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub estimate: CapacityEstimate,
    pub probes: Vec<Probe>,
    /// Set when the result needs qualification: the SLO was infeasible even
    /// at one user, or the search hit its VU ceiling while still passing.
    pub note: Option<String>,
}

/// Measure the capacity of `function` under `slo`.
///
/// Every probe runs on a fresh platform from `make_platform`, so load
/// levels never contaminate each other with warm instances or queue
/// backlogs. A level passes when the steady-state execution-duration
/// percentile meets the SLO and throttling stays within budget; capacity is
/// the steady-state successful request rate of the highest passing level.
pub fn measure_capacity<F>(
    mut make_platform: F,
    function: &str,
    slo: Slo,
    options: &MeasureOptions,
) -> Result<Measurement, EstimateError>
where
    F: FnMut() -> Result<Platform, EstimateError>,
{
    assert!(options.vu_low >= 1 && options.vu_low <= options.vu_high, "bad VU bracket");
    let mut probes = Vec::new();
    let mut config = None;

    let mut probe = |vus: u32, probes: &mut Vec<Probe>| -> Result<Probe, EstimateError> {
        let mut platform = make_platform()?;
        let cfg = platform
            .config(function)
            .ok_or_else(|| EstimateError::UnknownFunction(function.to_string()))?;
        config.get_or_insert(cfg);

        let stages = ramp_and_hold(options.probe_duration_s, vus);
        let opts = LoadOptions { payload: options.payload.clone(), ..LoadOptions::default() };
        let log = run_load(&mut platform, function, &stages, &opts)?;

        let ramp_ms = options.probe_duration_s * 0.1 * 1000.0;
        let end_ms = options.probe_duration_s * 1000.0;
        let steady = log.slice(ramp_ms, end_ms);
        let summary = throughput(steady, (end_ms - ramp_ms) / 1000.0);
        let exec_percentile_ms = percentile(steady, slo.percentile).ok();

        let passed = exec_percentile_ms.is_some_and(|p| p <= slo.max_ms)
            && summary.throttle_fraction <= options.throttle_budget;
        let result = Probe {
            vus,
            ok_rps: summary.ok_rps,
            exec_percentile_ms,
            throttle_fraction: summary.throttle_fraction,
            passed,
        };
        probes.push(result.clone());
        Ok(result)
    };

    let floor = probe(options.vu_low, &mut probes)?;
    let estimate = |fc_rps: f64, config| CapacityEstimate {
        function: function.to_string(),
        config,
        slo,
        fc_rps,
        method: Method::Measured,
        confidence: None,
    };

    if !floor.passed {
        let why = match floor.exec_percentile_ms {
            Some(p) => format!(
                "a single user already runs {p:.1} ms at p{:.0}, above the {:.1} ms bound",
                slo.percentile * 100.0,
                slo.max_ms
            ),
            None => "a single user saw no successful request".to_string(),
        };
        return Ok(Measurement {
            estimate: estimate(0.0, config.expect("probed at least once")),
            probes,
            note: Some(format!("SLO is unattainable at any load: {why}")),
        });
    }

    let mut low = options.vu_low;
    let mut best_rps = floor.ok_rps;
    let mut note = None;

    let ceiling = if options.vu_high > options.vu_low {
        Some(probe(options.vu_high, &mut probes)?)
    } else {
        None
    };
    match ceiling {
        Some(p) if p.passed => {
            best_rps = p.ok_rps;
            note = Some(format!(
                "still within the SLO at the {}-VU search ceiling; true capacity may be higher",
                options.vu_high
            ));
        }
        Some(_) => {
            let mut high = options.vu_high;
            while (high - low) as f64 > (low as f64 * options.resolution).max(1.0) {
                let mid = low + (high - low) / 2;
                let p = probe(mid, &mut probes)?;
                if p.passed {
                    low = mid;
                    best_rps = p.ok_rps;
                } else {
                    high = mid;
                }
            }
        }
        None => {}
    }

    Ok(Measurement {
        estimate: estimate(best_rps, config.expect("probed at least once")),
        probes,
        note,
    })
}
