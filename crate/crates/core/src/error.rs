use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside the domain of the operation.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The formula has no solution or is singular for these parameters.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative procedure failed to converge.
    #[error("no convergence after {iterations} iterations: {diagnostics}")]
    NonConvergence {
        iterations: usize,
        diagnostics: String,
    },

    /// A numerical routine produced a non-finite or otherwise unusable value.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors caused by the caller's inputs rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::InvalidInput(_) | Error::Domain(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
