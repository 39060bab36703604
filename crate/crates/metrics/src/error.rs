#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("window ending at {end_ms} ms is still open (clock at {clock_ms} ms)")]
    OpenWindow { end_ms: f64, clock_ms: f64 },
    #[error("no deployment named `{0}`")]
    UnknownFunction(String),
    #[error("sampling interval must be positive, got {0} ms")]
    InvalidInterval(f64),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed metrics row: {0}")]
    MalformedRow(String),
}
