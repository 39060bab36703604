//! The capacity quantity itself and its closed-form ideal value.

use std::fmt;
use std::str::FromStr;

use fncap_core::{DeploymentConfig, FunctionProfile, Slo};
use fncap_model::Family;
use fncap_sim::duration_model;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// How a capacity figure was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Closed-form upper bound from the duration model.
    Ideal,
    /// SLO-bounded load search on the simulator.
    Measured,
    /// Prediction by a trained regression model of the given family.
    Model(Family),
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Ideal => f.write_str("ideal"),
            Method::Measured => f.write_str("measured"),
            Method::Model(family) => write!(f, "model({family})"),
        }
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Method, String> {
        match s {
            "ideal" => Ok(Method::Ideal),
            "measured" => Ok(Method::Measured),
            other => other
                .strip_prefix("model(")
                .and_then(|rest| rest.strip_suffix(')'))
                .and_then(Family::from_tag)
                .map(Method::Model)
                .ok_or_else(|| format!("unknown capacity method {other:?}")),
        }
    }
}

impl Serialize for Method {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Method {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Method, D::Error> {
        String::deserialize(deserializer)?.parse().map_err(D::Error::custom)
    }
}

/// One capacity figure for one function at one deployment configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityEstimate {
    pub function: String,
    pub config: DeploymentConfig,
    pub slo: Slo,
    /// Requests per second the function can serve within the SLO.
    pub fc_rps: f64,
    pub method: Method,
    /// Test R^2 of the predicting model; absent for ideal and measured.
    pub confidence: Option<f64>,
}

/// Invocations a function can serve per interval: each of the `c` instances
/// completes `floor(interval / exec_time)` whole requests.
pub fn ideal_capacity(exec_time_ms: f64, c: u32, interval_ms: f64) -> f64 {
    assert!(exec_time_ms > 0.0, "execution time must be positive");
    assert!(interval_ms > 0.0, "interval must be positive");
    (interval_ms / exec_time_ms).floor() * c as f64
}

/// The ideal estimate for a profile at a configuration, using the duration
/// model's mean service time at the allocated memory and a one-second
/// interval, so the figure is directly in requests per second.
pub fn ideal_estimate(
    profile: &FunctionProfile,
    config: DeploymentConfig,
    slo: Slo,
) -> CapacityEstimate {
    let exec_ms = duration_model(profile, config.memory_mib);
    CapacityEstimate {
        function: profile.name.clone(),
        config,
        slo,
        fc_rps: ideal_capacity(exec_ms, config.concurrency, 1000.0),
        method: Method::Ideal,
        confidence: None,
    }
}
