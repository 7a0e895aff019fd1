//! Error type shared across the library.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("shape mismatch: {left} vs {right}")]
    ShapeMismatch { left: String, right: String },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("softmax over fully masked input")]
    AllMasked,

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("non-finite gradient in parameter '{0}'")]
    NonFiniteGradient(String),

    #[error("non-deterministic loss closure: two identical evaluations differ ({first} vs {second})")]
    NonDeterministicClosure { first: f64, second: f64 },

    #[error("checkpoint version mismatch: expected '{expected}', found '{found}'")]
    CheckpointVersion { expected: String, found: String },

    #[error("checkpoint corrupt at parameter '{param}': {detail}")]
    CheckpointCorrupt { param: String, detail: String },

    #[error("checkpoint malformed: {0}")]
    CheckpointMalformed(String),

    #[error("{path}:{line}: {msg}")]
    ParseAt {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("parse error at byte {position}: {msg}")]
    ParseBytePos { position: usize, msg: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("unknown tag '{0}'")]
    UnknownTag(String),

    #[error("unknown config key '{0}'")]
    UnknownConfigKey(String),

    #[error("non-finite loss at epoch {epoch}, step {step}")]
    NumericAbort { epoch: usize, step: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;

impl CoreError {
    pub fn shape_mismatch(left: &[usize], right: &[usize]) -> Self {
        CoreError::ShapeMismatch {
            left: format!("{left:?}"),
            right: format!("{right:?}"),
        }
    }
}
