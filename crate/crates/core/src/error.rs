use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("malformed policy vector: {0}")]
    MalformedPolicyVector(String),

    #[error("invalid selection: {0}")]
    InvalidSelection(String),

    #[error("outcome does not match the pending selection: {0}")]
    OutcomeMismatch(String),

    #[error("{path}: line {line}: {message}")]
    ArmTable {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("unknown synthetic generator `{0}` (expected `uniform` or `conflicting`)")]
    UnknownGenerator(String),

    #[error("unknown policy `{0}` (expected one of conucb, cucb, exp3m, oracle, uniform)")]
    UnknownPolicy(String),

    #[error("infeasible instance: {0}")]
    Infeasible(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

/// Coarse error classes, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Instance,
    Io,
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::InvalidParameter(_)
            | Error::UnknownGenerator(_)
            | Error::UnknownPolicy(_) => ErrorCategory::Config,
            Error::ArmTable { .. } | Error::Infeasible(_) => ErrorCategory::Instance,
            Error::Io { .. } => ErrorCategory::Io,
            Error::DimensionMismatch { .. }
            | Error::MalformedPolicyVector(_)
            | Error::InvalidSelection(_)
            | Error::OutcomeMismatch(_) => ErrorCategory::Config,
        }
    }

    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}
