use thiserror::Error;

/// Errors raised by idbound operations.
///
/// Variants are grouped so callers can map them onto coarse outcomes:
/// everything except [`Error::Io`] and [`Error::Csv`] is a domain or
/// precondition failure of the caller's inputs.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A configuration or constructor argument is invalid; `key` names the
    /// offending field (e.g. `measure.atoms[1].w`).
    #[error("invalid `{key}`: {reason}")]
    Invalid { key: String, reason: String },

    #[error("unsupported operation: {0}")]
    Unsupported(&'static str),

    #[error("{what} = {value} outside domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: String,
    },

    /// The requested level exceeds the left-hand limit of tau at the edge
    /// of its domain, so tau cannot be inverted there.
    #[error("s = {value} is beyond the range of tau: requires s < τ((M/λ)⁻) = {limit}")]
    TauRange { value: f64, limit: f64 },

    /// A named side condition of a bound does not hold.
    #[error("precondition violated: {condition} ({detail})")]
    Precondition {
        condition: &'static str,
        detail: String,
    },

    #[error("bound not applicable: {0}")]
    Inapplicable(&'static str),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid {
            key: key.into(),
            reason: reason.into(),
        }
    }

    /// True for failures caused by the environment (files, streams) rather
    /// than by the numeric inputs.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io(_) => true,
            Error::Csv(e) => e.is_io_error(),
            Error::Json(e) => e.is_io(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
