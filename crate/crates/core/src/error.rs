use std::path::{Path, PathBuf};

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A TSPLIB or solution-file syntax error.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(#[from] ParseError),

    #[error("vertex {vertex} out of range (instance has {vertices} vertices)")]
    VertexOutOfRange { vertex: usize, vertices: usize },

    #[error("infeasible: {m} salesmen but only {n} cities")]
    TooManySalesmen { m: usize, n: usize },

    #[error("stale move: {0}")]
    StaleMove(String),

    #[error("instance too large for the exact solver ({n} cities, limit {limit})")]
    ExactLimit { n: usize, limit: usize },

    #[error("external tour solver failed: {0}")]
    ExternalSolver(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}
