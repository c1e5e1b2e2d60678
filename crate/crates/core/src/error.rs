use thiserror::Error;

/// Errors raised by the algebroid, transport and extremal routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        actual: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("integration diverged at t = {t}")]
    IntegrationDiverged { t: f64 },

    #[error("cannot compose paths: endpoint gap {gap:e}")]
    CompositionGap { gap: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("control switched more than {limit} times (chattering)")]
    Chattering { limit: usize },

    #[error("box control space of dimension {dim} needs a registered maximizer")]
    UnsupportedDimension { dim: usize },

    #[error("representation is not bracket-compatible (residual {residual:e})")]
    RepresentationIncompatible { residual: f64 },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn dims(context: impl Into<String>, expected: usize, actual: usize) -> Self {
        Error::DimensionMismatch {
            context: context.into(),
            expected,
            actual,
        }
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}
