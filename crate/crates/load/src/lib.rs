//! Closed-loop load generation against the simulated platform.
//!
//! Each virtual user (VU) is a loop: send a request, wait for the outcome,
//! send the next. Offered request rate therefore emerges from the service
//! latency (RPS = VUs / latency) instead of being dialed in directly, which
//! is how capacity limits actually get probed. Staged ramps grow or shrink
//! the VU pool linearly over each stage.
//!
//! The engine runs in virtual time by pumping the platform's event loop, so
//! a minutes-long test finishes in milliseconds and is reproducible. An
//! HTTP backend (feature `http`, on by default) drives the same schedule
//! against a live endpoint in wall time.

pub mod analysis;
pub mod engine;
pub mod error;
#[cfg(feature = "http")]
pub mod http;
pub mod log;
pub mod schedule;

pub use analysis::{percentile, throughput, Throughput};
pub use engine::{run_load, LoadOptions};
pub use error::LoadError;
#[cfg(feature = "http")]
pub use http::run_load_http;
pub use log::{RequestLog, RequestRecord, RequestStatus};
pub use schedule::{ramp_and_hold, LoadStage};
