use crate::engine::CallId;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("function `{0}` is already deployed")]
    DuplicateFunction(String),
    #[error("function `{0}` is not deployed")]
    UnknownFunction(String),
    #[error("cannot schedule an arrival at {at_ms} ms: the clock is already at {clock_ms} ms")]
    TimeTravel { at_ms: f64, clock_ms: f64 },
    #[error("event queue drained but call {0} never resolved")]
    Stalled(CallId),
}
