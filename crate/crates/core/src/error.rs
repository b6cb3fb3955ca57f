use thiserror::Error;

/// Errors raised by samplers, linear algebra and special-function evaluation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("matrix is numerically singular (min/max eigenvalue ratio {ratio:e})")]
    NumericallySingular { ratio: f64 },

    #[error("{what} did not converge after {terms} terms")]
    NonConvergence { what: &'static str, terms: usize },

    #[error("no K <= {cap} reaches the requested mean SNR loss")]
    NotFound { cap: u32 },

    #[error("trial {index} failed: {source}")]
    Trial {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("output error: {0}")]
    Output(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for errors caused by bad user input rather than numerical trouble.
    pub fn is_argument_error(&self) -> bool {
        match self {
            Error::InvalidParameter(_) | Error::DimensionMismatch(_) => true,
            Error::Trial { source, .. } => source.is_argument_error(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
