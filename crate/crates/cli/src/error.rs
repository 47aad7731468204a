use std::io;

use thiserror::Error;

/// Failures of a CLI run, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid flags or configuration, detected before any computation.
    #[error("configuration error: {0}")]
    Config(String),

    /// Integration failures beyond the per-cell tolerance policy.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<ppvl::Error> for CliError {
    fn from(e: ppvl::Error) -> Self {
        match e {
            ppvl::Error::InvalidParameter(_) | ppvl::Error::NotExists { .. } => {
                CliError::Config(e.to_string())
            }
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(io::Error::new(io::ErrorKind::InvalidData, e))
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
