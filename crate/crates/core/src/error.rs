use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid distance parameters: {0}")]
    Spec(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("search error: {0}")]
    Search(String),

    #[error("input too large for exhaustive enumeration: {0}")]
    Size(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
