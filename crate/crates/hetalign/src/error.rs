//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed input file content; carries the 1-based line number.
    #[error("parse error at {path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    /// Structurally invalid data (dangling endpoints, one-to-one violations, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// API misuse: scope or dimension mismatches, inconsistent configuration.
    #[error("usage error: {0}")]
    Usage(String),

    /// Gradient descent diverged (objective rose for too many consecutive steps).
    #[error("divergence after {iters} iterations: objective increased for {rising} consecutive steps; reduce the step length eta")]
    Divergence { iters: usize, rising: usize },

    /// Wraps a failure with the pipeline stage in which it occurred.
    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
