//! CLI error taxonomy with stable exit codes: 2 for configuration errors,
//! 3 for data errors, 4 for model/data mismatches.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("{0}")]
    Data(#[from] somna::Error),

    #[error("model/data mismatch: {0}")]
    Mismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Mismatch(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
