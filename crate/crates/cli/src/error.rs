//! Error channel with the exit-code split: validation problems (bad plan,
//! unknown names, mismatched output dir) exit 2, pipeline failures exit 1.

use std::fmt::Display;
use std::process::ExitCode;

use fncap_core::PlanError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// The user handed us something invalid: plan, target, flags.
    #[error("{0}")]
    Validation(String),
    /// Inputs were fine but the pipeline failed while running.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn validation(message: impl Display) -> CliError {
        CliError::Validation(message.to_string())
    }

    pub fn runtime(message: impl Display) -> CliError {
        CliError::Runtime(message.to_string())
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Validation(_) => ExitCode::from(2),
            CliError::Runtime(_) => ExitCode::from(1),
        }
    }
}

impl From<PlanError> for CliError {
    fn from(e: PlanError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}
