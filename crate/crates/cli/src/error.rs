use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),
    #[error(transparent)]
    Core(#[from] qpspec::Error),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

impl CliError {
    /// 2 for anything the user can fix in the configuration, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) | CliError::Json(_) => 2,
            CliError::Core(qpspec::Error::InvalidParameter { .. })
            | CliError::Core(qpspec::Error::MalformedDecimal(_))
            | CliError::Core(qpspec::Error::PrecisionExhausted { .. })
            | CliError::Core(qpspec::Error::RationalFrequency(_))
            | CliError::Core(qpspec::Error::PoleProximity { .. })
            | CliError::Core(qpspec::Error::RotationDomain(_)) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
