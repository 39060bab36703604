//! A local FaaS platform, simulated.
//!
//! The platform reproduces the invocation semantics of commercial serverless
//! offerings: instances are created on demand up to a per-function
//! concurrency cap, warm instances are reused, idle instances are reaped,
//! cold starts cost extra, and requests beyond capacity are throttled or
//! queued. Time is virtual (milliseconds, event-driven), so a multi-hour
//! load test executes in milliseconds of wall time and every run is
//! reproducible from a seed. An optional HTTP facade binds the virtual clock
//! to the wall clock 1:1 for live load testing.

pub mod behavior;
pub mod duration;
pub mod engine;
pub mod error;
#[cfg(feature = "http")]
pub mod http;
pub mod rng;
pub mod timeline;

pub use behavior::{derive_payload, synth_response, Behavior, Exchange, ExchangeTap};
pub use duration::duration_model;
pub use engine::{CallId, Counters, InvocationOutcome, OutcomeRecord, Platform, Resolved, Status};
pub use error::SimError;
pub use timeline::{timeline_average, timeline_max, timeline_value_at};
