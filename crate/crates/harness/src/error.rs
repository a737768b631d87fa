use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] divergauge_core::Error),

    #[error("line {line}: {message}")]
    Record { line: usize, message: String },

    #[error("{path}: {message}")]
    File { path: PathBuf, message: String },

    #[error("configuration: {0}")]
    Config(String),

    #[error("label {label:?} mixes samples from different configurations ({first} and {other})")]
    MixedConfig {
        label: String,
        first: String,
        other: String,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
