use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// Bad configuration or parameters (exit 2).
    Validation,
    /// A numerical contract was violated (exit 3).
    Numerical,
    /// File system or format failure (exit 4).
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("grid too coarse: {0}")]
    Resolution(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("amplitude is not normalized (sum |f|^2 dws dwi = {norm:.12})")]
    NotNormalized { norm: f64 },

    #[error("undersampled: {0}")]
    Aliasing(String),

    #[error("scan window too small: {0}")]
    WindowTooSmall(String),

    #[error("Fisher information is singular at delay {delay_ps} ps (P = {probability})")]
    Singular { delay_ps: f64, probability: f64 },

    #[error("likelihood is flat over the search window (log-likelihood spread {spread:.3e} nats)")]
    NonIdentifiable { spread: f64 },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("dispersion source `sellmeier-table` requested but no table was supplied")]
    MissingSellmeier,

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn parse(context: impl Into<String>, message: impl ToString) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.to_string(),
        }
    }

    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::InvalidParameter { .. } | Error::MissingSellmeier => ErrorCategory::Validation,
            Error::Io(_) | Error::Csv(_) | Error::Parse { .. } | Error::Schema(_) => {
                ErrorCategory::Io
            }
            _ => ErrorCategory::Numerical,
        }
    }
}
