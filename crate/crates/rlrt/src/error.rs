use std::path::PathBuf;

use thiserror::Error;

/// Errors from experiments and configuration.
#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] rlrt_core::Error),
    #[error("replication {rep}: {msg}")]
    Replication { rep: u32, msg: String },
    #[error("thread pool: {0}")]
    Pool(String),
}

/// Errors reading or writing matrices and result files.
#[derive(Debug, Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}, column {column}: cannot parse {field:?} as a number")]
    Parse {
        line: u64,
        column: usize,
        field: String,
    },
    #[error("line {line}: expected {expected} fields, found {found}")]
    Ragged {
        line: u64,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error("no data rows")]
    Empty,
    #[error(transparent)]
    Data(#[from] rlrt_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
