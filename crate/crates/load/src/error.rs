use fncap_sim::SimError;

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("load stages must be non-empty with positive durations")]
    InvalidStages,
    #[error("no successful samples in the requested window")]
    EmptyWindow,
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed request log row: {0}")]
    MalformedLog(String),
}
