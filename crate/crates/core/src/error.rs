use thiserror::Error;

/// Errors raised by the numerical library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of a function (non-finite, wrong sign, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A value object failed its invariants.
    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },

    /// A search interval did not bracket the requested crossing.
    #[error("range error: {0}")]
    Range(String),

    /// A numerical procedure failed to reach its tolerance.
    #[error("numerical error: {message} ({diagnostics})")]
    Numerical { message: String, diagnostics: String },
}

impl Error {
    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            reason: reason.into(),
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn range(msg: impl Into<String>) -> Self {
        Error::Range(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
