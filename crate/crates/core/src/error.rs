//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("batch normalization needs a per-channel population of at least 2, got {0}")]
    DegenerateBatch(usize),

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("series too short: need at least {needed} points, got {got}")]
    SeriesTooShort { needed: usize, got: usize },

    #[error("invalid split: {0}")]
    BadSplit(String),

    #[error("anomaly ratio {ratio} is infeasible for series length {length}")]
    InfeasibleRatio { ratio: f64, length: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("training aborted: non-finite loss at epoch {0}")]
    NonFiniteLoss(usize),

    #[error("no positive labels in the evaluated range; recall is undefined")]
    NoPositiveLabels,

    #[error("corrupt model file: {0}")]
    CorruptModel(String),

    #[error("model file was trained with a different configuration (fingerprint {got:#018x}, expected {expected:#018x})")]
    ConfigMismatch { expected: u64, got: u64 },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("{path}:{line}: label must be 0 or 1, got {value}")]
    BadLabel {
        path: String,
        line: usize,
        value: String,
    },
}

impl Error {
    pub(crate) fn shape(expected: impl Into<String>, got: impl Into<String>) -> Self {
        Error::ShapeMismatch {
            expected: expected.into(),
            got: got.into(),
        }
    }

    /// True for errors caused by unusable user input (bad files, bad config),
    /// as opposed to internal failures.
    pub fn is_user_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Parse { .. }
                | Error::BadLabel { .. }
                | Error::InvalidConfig(_)
                | Error::BadSplit(_)
                | Error::SeriesTooShort { .. }
                | Error::InfeasibleRatio { .. }
                | Error::ConfigMismatch { .. }
        )
    }
}
