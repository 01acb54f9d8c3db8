use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty difficulty set")]
    EmptyDifficulties,

    #[error("{0}")]
    EmptyInput(&'static str),

    #[error("quantile fraction {0} outside (0, 1]")]
    QuantileOutOfRange(f64),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid probability pair (p_safe={p_safe}, p_vul={p_vul})")]
    InvalidProbability { p_safe: f64, p_vul: f64 },

    #[error("dimension mismatch: model expects {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite gradient at parameter {index}")]
    NonFiniteGradient { index: usize },

    #[error("invalid config: {field} {reason}")]
    Config { field: String, reason: String },

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("duplicate sample id {0:?}")]
    DuplicateId(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("session is closed")]
    SessionClosed,

    #[error("training invariant violated: {0}")]
    Training(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization: {0}")]
    Serde(String),
}

impl Error {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable machine-readable category, used by the CLI for exit status.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Config { .. } | Error::QuantileOutOfRange(_) => "config",
            Error::Io { .. } => "io",
            Error::Parse { .. } | Error::DuplicateId(_) | Error::Data(_) | Error::Serde(_) => {
                "data"
            }
            Error::DimensionMismatch { .. } => "mismatch",
            Error::Training(_) | Error::NonFiniteGradient { .. } => "training",
            Error::EmptyDifficulties
            | Error::EmptyInput(_)
            | Error::LengthMismatch { .. }
            | Error::InvalidProbability { .. }
            | Error::SessionClosed => "input",
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}
