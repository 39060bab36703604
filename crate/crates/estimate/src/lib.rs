//! Function capacity, three ways.
//!
//! Capacity is the request rate a function sustains at a given deployment
//! configuration without violating its execution-duration SLO. This crate
//! computes it from three independent directions and reconciles them:
//!
//! - [`ideal_capacity`]: the closed-form ceiling from the duration model,
//!   `floor(interval / exec_time) x concurrency`.
//! - [`measure_capacity`]: ground truth, found by binary-searching offered
//!   load on the simulator until the SLO or the throttle budget breaks.
//! - [`estimate_capacity`]: a trained model's prediction at configurations
//!   that were never load-tested, with imputed features and extrapolation
//!   warnings.
//!
//! [`AccuracyReport`] renders the model-vs-truth comparison per family and
//! function; [`CapacityTriple`] rows export all three figures side by side.

pub mod capacity;
pub mod error;
pub mod measure;
pub mod predict;
pub mod report;

pub use capacity::{ideal_capacity, ideal_estimate, CapacityEstimate, Method};
pub use error::EstimateError;
pub use measure::{measure_capacity, Measurement, MeasureOptions, Probe};
pub use predict::{estimate_capacity, FeatureImputer, ModelEstimate};
pub use report::{
    triples_to_csv, AccuracyReport, CapacityTriple, ACCURACY_FLAG_THRESHOLD,
};
