//! Per-function monitoring metrics over fixed sampling windows.
//!
//! Six signals are collected per window: concurrent instances, invocation
//! count, execution duration (mean plus p50/p95), memory usage, allocated
//! memory, and the configured concurrency limit. Windows tile the test
//! duration back to back, and a window can only be sampled once it lies
//! entirely in the simulated past.
//!
//! Series round-trip losslessly through CSV (fixed column order) and JSON,
//! so a training run can consume metrics produced elsewhere.

pub mod error;
pub mod io;
pub mod sample;

pub use error::MetricsError;
pub use io::{read_csv, read_json, write_csv, write_json};
pub use sample::{collect_series, sample, MetricsSample};
