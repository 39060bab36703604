use fncap_sim::SimError;

#[derive(Debug, thiserror::Error)]
pub enum SandboxError {
    #[error("function `{0}` is not part of the application graph")]
    UnknownFunction(String),
    #[error("no recorded exchange for direct callee `{0}`; record a run that exercises it first")]
    MissingRecording(String),
    #[error("no recording at all for callee `{0}`")]
    NoRecordingForCallee(String),
    #[error("exchange store format version {0} is not supported (expected {expected})", expected = crate::store::STORE_VERSION)]
    UnsupportedVersion(u32),
    #[error("malformed exchange store line {line}: {reason}")]
    MalformedStore { line: usize, reason: String },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Sim(#[from] SimError),
}
