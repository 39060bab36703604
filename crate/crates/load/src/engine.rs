//! Closed-loop load generation against an in-process simulated platform.
//!
//! Each virtual user issues one request, waits for it to resolve, then
//! immediately issues the next. Offered rate therefore follows
//! `rps = vus / latency_s`, the closed-loop law.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use fncap_sim::{Platform, Status};

use crate::error::LoadError;
use crate::log::{RequestLog, RequestRecord, RequestStatus};
use crate::schedule::{LoadStage, VuPlan};

/// Knobs for a load run.
#[derive(Debug, Clone)]
pub struct LoadOptions {
    /// Request body sent on every invocation.
    pub payload: Vec<u8>,
    /// Pause before resend after a throttled, timed-out, or failed request.
    /// Without it a throttled VU would hammer the platform at the same
    /// instant forever.
    pub error_backoff_ms: f64,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self { payload: b"{}".to_vec(), error_backoff_ms: 100.0 }
    }
}

/// Minimum forward progress per VU iteration, in ms. Keeps the loop finite
/// even when a response resolves in zero simulated time.
const MIN_ADVANCE_MS: f64 = 1e-3;

/// Drive `stages` of virtual users against `function`, starting at the
/// platform's current clock. Returns one record per request, including
/// throttled and timed-out ones. The platform is left at the time the last
/// request resolved; queued reaping events stay pending.
pub fn run_load(
    platform: &mut Platform,
    function: &str,
    stages: &[LoadStage],
    opts: &LoadOptions,
) -> Result<RequestLog, LoadError> {
    let plan = VuPlan::build(stages, platform.clock_ms())?;

    // Min-heap of (send time, vu) for requests not yet submitted. Times are
    // non-negative, so the IEEE-754 bit pattern orders them numerically.
    let mut due: BinaryHeap<Reverse<(u64, u32)>> = BinaryHeap::new();
    for &(at_ms, vu) in &plan.starts {
        due.push(Reverse((time_key(at_ms), vu)));
    }

    let mut inflight: HashMap<fncap_sim::CallId, (u32, f64)> = HashMap::new();
    let mut records = Vec::new();

    while !due.is_empty() || !inflight.is_empty() {
        // Submit every request due at or before the next platform event, so
        // arrivals interleave with completions in timestamp order. Because
        // submissions only add events at their own send time, the platform
        // clock can never overtake a pending send time.
        let horizon = platform.next_event_at();
        while let Some(&Reverse((bits, vu))) = due.peek() {
            let at_ms = f64::from_bits(bits);
            if horizon.is_some_and(|h| at_ms > h) {
                break;
            }
            due.pop();
            let call = platform.submit(function, opts.payload.clone(), at_ms)?;
            inflight.insert(call, (vu, at_ms));
        }

        platform.step();

        for resolved in platform.take_resolved() {
            // Workflow child calls resolve through the same channel; only
            // requests this generator submitted belong in the log.
            let Some((vu, send_ms)) = inflight.remove(&resolved.call) else {
                continue;
            };
            let outcome = resolved.outcome;
            let status = match outcome.status {
                Status::Ok => RequestStatus::Ok,
                Status::Throttled => RequestStatus::Throttled,
                Status::Timeout => RequestStatus::Timeout,
            };
            records.push(RequestRecord {
                ts_ms: send_ms,
                status,
                exec_ms: outcome.execution_ms,
                total_ms: outcome.total_ms,
                cold: outcome.cold,
                instance: outcome.instance,
            });

            let done_ms = send_ms + outcome.total_ms;
            let mut next_send = if status == RequestStatus::Ok {
                done_ms
            } else {
                done_ms + opts.error_backoff_ms
            };
            next_send = next_send.max(send_ms + MIN_ADVANCE_MS);
            if next_send < plan.end_ms && plan.is_active(vu, next_send) {
                due.push(Reverse((time_key(next_send), vu)));
            }
        }
    }

    Ok(RequestLog::new(records))
}

fn time_key(t: f64) -> u64 {
    debug_assert!(t >= 0.0 && t.is_finite());
    t.to_bits()
}
