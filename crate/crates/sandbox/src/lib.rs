//! Function isolation through record and replay.
//!
//! Load-testing one function of a composed application measures its
//! neighbors too: a slow downstream call inflates the target's numbers. To
//! isolate a target, this crate first records every inter-function exchange
//! during a reference run of the full application, then builds a sandbox
//! where the target runs unchanged but each of its direct callees is
//! replaced by a mock that answers from the recordings in near-zero time.
//!
//! Recordings are keyed by a digest of `(callee, canonicalized payload)`.
//! A mock answers an unseen payload with the callee's most recent recording
//! (payloads often embed trace ids or timestamps; exact-match-only replay
//! would be brittle), and the fallback rate is reported so a noisy replay
//! is visible rather than silent.

pub mod build;
pub mod error;
pub mod record;
pub mod store;

pub use build::{build_sandbox, SandboxPlan, MOCK_LATENCY_MS};
pub use error::SandboxError;
pub use record::{record_run, RecordingReport};
pub use store::{mock_lookup, request_key, ExchangeStore, FrozenStore, RecordedExchange, ReplayStats};
