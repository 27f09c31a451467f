use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported grid: {0}")]
    UnsupportedGrid(String),

    #[error("pole at {location}: {condition}")]
    Pole { location: Complex64, condition: String },

    #[error("kernel is not integrable: {0}")]
    Divergence(String),

    #[error("insufficient resolution: need exactness degree {needed}, have {available}")]
    Resolution { needed: usize, available: usize },

    #[error("excluded harmonic component: {0}")]
    ExcludedComponent(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("insufficient samples: got {got}, need at least {min}")]
    InsufficientSamples { got: usize, min: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("multiplier oracle gate failed: {0}")]
    GateFailed(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn pole(location: Complex64, condition: impl Into<String>) -> Self {
        Error::Pole {
            location,
            condition: condition.into(),
        }
    }

    /// Short machine-readable tag, used in the CLI's error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::Domain(_) => "domain-error",
            Error::UnsupportedGrid(_) => "unsupported-grid",
            Error::Pole { .. } => "pole-error",
            Error::Divergence(_) => "divergence-error",
            Error::Resolution { .. } => "resolution-error",
            Error::ExcludedComponent(_) => "excluded-component",
            Error::Precondition(_) => "precondition-error",
            Error::InsufficientSamples { .. } => "insufficient-samples",
            Error::Unsupported(_) => "unsupported",
            Error::GateFailed(_) => "gate-failed",
            Error::Parse(_) => "parse-error",
            Error::Io(_) => "io-error",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
