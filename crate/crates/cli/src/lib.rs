//! The `fncap` pipeline as a library: each subcommand is an ordinary
//! function so tests (and other tools) can drive runs without spawning the
//! binary. The flow mirrors the capacity-estimation protocol end to end:
//!
//! 1. `record`: deploy the whole application once and capture every
//!    inter-function exchange.
//! 2. `experiment`: for each memory x concurrency cell, deploy the target in
//!    a sandbox with replaying mocks, run a stepped VU load, and write one
//!    metrics CSV.
//! 3. `train`: fit the five model families per function with grid search
//!    and 6-fold cross-validation; write artifacts and the accuracy report.
//! 4. `estimate`: answer capacity queries from the ideal arithmetic, the
//!    best model, and optionally a fresh measurement.
//!
//! Everything downstream of a `(plan, seed)` pair is deterministic except
//! manifest timestamps.

pub mod error;
pub mod estimate;
pub mod experiment;
pub mod manifest;
pub mod record;
pub mod train;

pub use error::CliError;
pub use estimate::{cmd_estimate, EstimateArgs, EstimateOutcome};
pub use experiment::{cmd_experiment, ExperimentOutcome};
pub use manifest::{plan_digest, CellArtifact, CellFailure, RunManifest, MANIFEST_FILE};
pub use record::{cmd_record, RecordOutcome, STORE_FILE};
pub use train::{cmd_train, TrainOutcome, ACCURACY_REPORT_FILE, TRAINING_REPORT_FILE};

/// Derive an independent seed for a named stream of randomness, so parallel
/// grid cells and repeated measurements never share or reorder draws.
pub fn stream_seed(seed: u64, label: &str) -> u64 {
    seed ^ fncap_sim::rng::fnv1a(label.as_bytes())
}
