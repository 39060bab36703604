//! Model-based capacity at configurations that were never load-tested.

use fncap_core::stats::{mean, simple_linear_fit};
use fncap_core::{DeploymentConfig, Slo};
use fncap_model::{Dataset, TrainedModel, FEATURE_NAMES};

use crate::capacity::{CapacityEstimate, Method};
use crate::error::EstimateError;

/// Column positions within [`FEATURE_NAMES`].
const COL_ALLOC: usize = 2;
const COL_USAGE: usize = 3;

/// Fills in the two feature values a what-if query cannot supply directly.
///
/// `memory_usage` comes from a single-predictor regression against
/// `allocated_memory` over the training rows. `concurrent_instances` is the
/// configured concurrency limit, the saturation assumption: capacity
/// questions are about the function fully scaled out. The imputer also
/// remembers the training ranges of every feature so estimates outside the
/// measured grid can be called out as extrapolations.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureImputer {
    pub usage_slope: f64,
    pub usage_intercept: f64,
    /// Fit quality of the usage regression, for reporting.
    pub usage_r2: f64,
    /// Length of the metric windows the target counts events in, seconds.
    pub window_s: f64,
    pub feature_min: Vec<f64>,
    pub feature_max: Vec<f64>,
}

impl FeatureImputer {
    pub fn fit(data: &Dataset, window_s: f64) -> Result<FeatureImputer, EstimateError> {
        assert!(window_s > 0.0, "window length must be positive");
        if data.len() < 2 {
            return Err(EstimateError::Setup(format!(
                "imputer needs at least 2 training rows, got {}",
                data.len()
            )));
        }
        let alloc = data.column(COL_ALLOC);
        let usage = data.column(COL_USAGE);
        // A grid with a single memory setting has no usable slope; fall back
        // to the constant mean usage.
        let (usage_slope, usage_intercept, usage_r2) = simple_linear_fit(&alloc, &usage)
            .unwrap_or_else(|| (0.0, mean(&usage).unwrap_or(0.0), 1.0));

        let mut feature_min = vec![f64::INFINITY; data.width()];
        let mut feature_max = vec![f64::NEG_INFINITY; data.width()];
        for row in &data.x {
            for (j, &v) in row.iter().enumerate() {
                feature_min[j] = feature_min[j].min(v);
                feature_max[j] = feature_max[j].max(v);
            }
        }
        Ok(FeatureImputer {
            usage_slope,
            usage_intercept,
            usage_r2,
            window_s,
            feature_min,
            feature_max,
        })
    }

    pub fn memory_usage_for(&self, allocated_mib: f64) -> f64 {
        self.usage_intercept + self.usage_slope * allocated_mib
    }

    pub fn concurrent_instances_for(&self, config: DeploymentConfig) -> f64 {
        config.concurrency as f64
    }
}

/// A model-based estimate plus anything the caller should know about how
/// much to trust it.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelEstimate {
    pub estimate: CapacityEstimate,
    pub warnings: Vec<String>,
}

/// Predict capacity at an arbitrary configuration.
///
/// The feature vector puts the SLO bound in the execution-duration slot, so
/// the prediction reads as "throughput while running at the duration the
/// SLO allows". The model output counts invocations per metric window; it
/// is clamped at zero and converted to requests per second.
pub fn estimate_capacity(
    model: &TrainedModel,
    function: &str,
    config: DeploymentConfig,
    slo: Slo,
    imputer: &FeatureImputer,
) -> ModelEstimate {
    let alloc = config.memory_mib as f64;
    let features = vec![
        imputer.concurrent_instances_for(config),
        slo.max_ms,
        alloc,
        imputer.memory_usage_for(alloc),
        config.concurrency as f64,
    ];

    let mut warnings = Vec::new();
    for (j, (&v, name)) in features.iter().zip(FEATURE_NAMES).enumerate() {
        let (lo, hi) = (imputer.feature_min[j], imputer.feature_max[j]);
        // Imputed values are reconstructed through an affine fit, so a point
        // that sits exactly on the hull boundary can land an ulp outside it.
        let slack = 1e-9 * (1.0 + lo.abs().max(hi.abs()));
        if v < lo - slack || v > hi + slack {
            warnings.push(format!(
                "{name} = {v} lies outside the training range [{lo}, {hi}]; \
                 this estimate is an extrapolation"
            ));
        }
    }

    let raw = model.predict(&features);
    let invocations = if raw < 0.0 {
        warnings.push(format!(
            "model predicted {raw:.3} invocations per window; clamped to zero"
        ));
        0.0
    } else {
        raw
    };

    ModelEstimate {
        estimate: CapacityEstimate {
            function: function.to_string(),
            config,
            slo,
            fc_rps: invocations / imputer.window_s,
            method: Method::Model(model.family),
            confidence: model.test_r2,
        },
        warnings,
    }
}
