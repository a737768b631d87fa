use std::path::PathBuf;

/// Errors raised by the core library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("non-finite value at {location}")]
    NonFinite { location: String },

    #[error("matrix is not symmetric: entry ({row}, {col}) differs from its transpose")]
    NotSymmetric { row: usize, col: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix claimed PSD has eigenvalue {value} below tolerance -{tol}")]
    NotPsd { value: f64, tol: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("row {row} ('{id}') has zero norm")]
    ZeroNormRow { row: usize, id: String },

    #[error("embedding file {path}: {message} (offset {offset})")]
    Format {
        path: PathBuf,
        offset: u64,
        message: String,
    },

    #[error("vocabulary mismatch: {0}")]
    VocabMismatch(String),

    #[error("provider vocabulary changed at step {step}: expected {expected}, got {got}")]
    VocabDrift {
        step: usize,
        expected: usize,
        got: usize,
    },

    #[error("unknown token id {id} (vocabulary size {vocab_size})")]
    UnknownToken { id: u32, vocab_size: usize },

    #[error("distribution is not normalized: exp-sum = {sum}")]
    NotNormalized { sum: f64 },

    #[error("decoding step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
