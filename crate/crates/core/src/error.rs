use std::path::PathBuf;

use crate::training::TrainRecord;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("non-finite input value {value} at index {index}")]
    NonFiniteInput { index: usize, value: f64 },

    #[error("shape mismatch in {context}: expected {expected}, got {actual}")]
    ShapeMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value produced by layer {layer}")]
    NonFiniteActivation { layer: usize },

    #[error("forward cache does not match parameters: {0}")]
    CacheMismatch(String),

    #[error("training diverged at iteration {iteration}: loss = {loss}")]
    Diverged {
        iteration: usize,
        loss: f64,
        record: Box<TrainRecord>,
    },

    #[error("{0}")]
    Metric(String),

    #[error("synthesis is identical in distribution to the ground truth (RWDE denominator is zero)")]
    PerfectSynthesis,

    #[error("encoder has no learned spectrum")]
    NoLearnedSpectrum,

    #[error("malformed image {path}: {reason}")]
    MalformedImage { path: PathBuf, reason: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
