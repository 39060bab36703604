#[derive(Debug, thiserror::Error)]
pub enum EstimateError {
    #[error("function {0:?} is not deployed on the platform")]
    UnknownFunction(String),
    #[error("probe platform setup failed: {0}")]
    Setup(String),
    #[error("load: {0}")]
    Load(#[from] fncap_load::LoadError),
    #[error("model: {0}")]
    Model(#[from] fncap_model::ModelError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
