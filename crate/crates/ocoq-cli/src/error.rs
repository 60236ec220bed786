//! Harness errors with their process exit codes.
//!
//! Exit code contract: 0 all checks pass, 1 a verification check failed,
//! 2 configuration error, 3 numerical error.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("numerical error: {0}")]
    Numerical(String),
}

impl HarnessError {
    pub fn config(path: &str, msg: impl std::fmt::Display) -> Self {
        HarnessError::Config(format!("{path}: {msg}"))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Io { .. } => 2,
            HarnessError::Numerical(_) => 3,
        }
    }
}

/// Core errors surfacing through the harness are numerical when they come
/// from iterative schemes, configuration problems otherwise.
impl From<ocoq_core::Error> for HarnessError {
    fn from(e: ocoq_core::Error) -> Self {
        match e {
            ocoq_core::Error::ProjectionStalled { .. } | ocoq_core::Error::Infeasible { .. } => {
                HarnessError::Numerical(e.to_string())
            }
            other => HarnessError::Config(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
