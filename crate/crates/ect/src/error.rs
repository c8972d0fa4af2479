use thiserror::Error;

/// Errors produced across the library.
#[derive(Debug, Error)]
pub enum EctError {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("unsupported scheme: {0}")]
    UnsupportedScheme(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("invalid complex: {0}")]
    InvalidComplex(String),

    #[error("config error on field {field}: {msg}")]
    Config { field: String, msg: String },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("g_table evaluation error: distance {0} outside table domain")]
    GTableDomain(f64),

    #[error("missing file for mesh {mesh}: {path}")]
    MissingArtifact { mesh: String, path: String },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, EctError>;
