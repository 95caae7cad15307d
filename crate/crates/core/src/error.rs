use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Caller supplied parameters outside the documented domain.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A matrix that must be SPD could not be factored.
    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error(
        "quadrature did not converge for entry ({row}, {col}): change {change:.3e} exceeds {tol:.3e}"
    )]
    QuadratureNotConverged {
        row: usize,
        col: usize,
        change: f64,
        tol: f64,
    },

    #[error("{context}: {source}")]
    Solver {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Wraps the error with a short description of where it happened.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Solver {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// True when the error stems from bad caller input rather than a numerical failure.
    pub fn is_usage(&self) -> bool {
        match self {
            Error::InvalidInput(_) => true,
            Error::Solver { source, .. } => source.is_usage(),
            _ => false,
        }
    }
}
