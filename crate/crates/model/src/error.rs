#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("dataset rows have inconsistent widths ({0} vs {1})")]
    RaggedRows(usize, usize),
    #[error("polynomial expansion of degree {degree} over {features} features needs {terms} columns, cap is {cap}")]
    ExpansionTooLarge { degree: u32, features: usize, terms: usize, cap: usize },
    #[error("target has zero variance; R^2 is undefined")]
    ZeroVariance,
    #[error("prediction and target lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("cross-validation needs at least k={k} rows, got {got}")]
    TooFewForFolds { k: usize, got: usize },
    #[error("hyperparameter grid is empty")]
    EmptyGrid,
    #[error("training diverged at epoch {epoch}: loss {loss}")]
    Diverged { epoch: usize, loss: f64 },
    #[error("model artifact version {0} is not supported")]
    UnsupportedVersion(u32),
    #[error("malformed model artifact: {0}")]
    MalformedArtifact(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
