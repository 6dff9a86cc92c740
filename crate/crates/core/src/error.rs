use std::path::PathBuf;

use thiserror::Error;

/// Every failure the simulator can report.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of a state function or geometric map.
    #[error("domain error: {0}")]
    Domain(String),

    /// The deformed configuration lost injectivity (shell contact) or a Jacobian became singular.
    #[error("geometry degeneracy: {0}")]
    Degeneracy(String),

    /// Inputs violate a documented precondition or hypothesis.
    #[error("validation error: {0}")]
    Validation(String),

    /// Malformed configuration text.
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    /// A numerical kernel failed to converge or exceeded its refinement cap.
    #[error("solver failure: {0}")]
    Solver(String),

    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A persisted file could not be parsed back.
    #[error("format error in {path}: {message}")]
    Format { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format { path: path.into(), message: message.into() }
    }
}
