//! What a deployed function does when an event reaches it.

use std::fmt;

use fncap_core::types::CallEdge;

use crate::rng::fnv1a;

/// One completed inter-function exchange, observed at the virtual instant
/// the callee's response reached the caller.
#[derive(Debug, Clone, Copy)]
pub struct Exchange<'a> {
    pub caller: &'a str,
    pub callee: &'a str,
    pub payload: &'a [u8],
    pub response: &'a [u8],
    pub at_ms: f64,
}

/// Observer for completed inter-function exchanges. Installed on a platform
/// during recording runs; fires once per successful downstream call.
pub type ExchangeTap = Box<dyn FnMut(Exchange<'_>) + Send>;

/// Handler logic attached to a deployment.
pub enum Behavior {
    /// Busy for the modeled service time, then respond. A leaf function.
    Compute,
    /// Busy for the modeled service time, then call downstream functions in
    /// edge-position order. A sync edge keeps this instance busy until the
    /// callee resolves; an async edge is fire-and-forget.
    Workflow(Vec<CallEdge>),
    /// Canned responder: fixed service time, response produced by the lookup
    /// function, no duration noise. This is what sandbox mocks deploy.
    Replay { latency_ms: f64, lookup: Box<dyn FnMut(&[u8]) -> Vec<u8> + Send> },
}

impl fmt::Debug for Behavior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Behavior::Compute => write!(f, "Compute"),
            Behavior::Workflow(edges) => f.debug_tuple("Workflow").field(edges).finish(),
            Behavior::Replay { latency_ms, .. } => {
                f.debug_struct("Replay").field("latency_ms", latency_ms).finish_non_exhaustive()
            }
        }
    }
}

/// The request body a workflow function sends downstream. Deterministic in
/// (caller, inbound payload) so that a recording made once covers every
/// later request that enters the application with the same payload.
pub fn derive_payload(caller: &str, inbound: &[u8]) -> Vec<u8> {
    format!("{{\"caller\":\"{caller}\",\"trace\":\"{:016x}\"}}", fnv1a(inbound)).into_bytes()
}

/// The response body a simulated function produces: a payload digest echo,
/// padded to the profile's response size.
pub fn synth_response(function: &str, payload: &[u8], response_size: usize) -> Vec<u8> {
    let mut body = format!("{{\"fn\":\"{function}\",\"echo\":\"{:016x}\",\"pad\":\"", fnv1a(payload));
    let close = "\"}";
    while body.len() + close.len() < response_size {
        body.push('x');
    }
    body.push_str(close);
    body.into_bytes()
}
