use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the simulator.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or document field is out of range or inconsistent.
    #[error("invalid {field}: {message}")]
    Validation { field: String, message: String },

    /// The configuration document could not be decoded.
    #[error("cannot parse scenario at `{path}`: {message}")]
    Parse { path: String, message: String },

    /// Two objects that must share a lattice do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A physically degenerate situation, e.g. a fully absorbing arm.
    #[error("{0}")]
    Physics(String),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by the input document rather than the run.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Validation { .. } | Error::Parse { .. })
    }

    /// Prefix the error message with the measurement or stage that raised it.
    pub fn context(self, what: &str) -> Self {
        match self {
            Error::Physics(m) => Error::Physics(format!("{what}: {m}")),
            Error::GridMismatch(m) => Error::GridMismatch(format!("{what}: {m}")),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
