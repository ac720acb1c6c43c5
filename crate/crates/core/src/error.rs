use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A structural invariant of the partition or an oracle table was broken.
    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// Bad configuration; `field` names the offending setting.
    #[error("usage error in `{field}`: {message}")]
    Usage { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn invariant(msg: impl Into<String>) -> Self {
        Error::InvariantViolation(msg.into())
    }

    pub(crate) fn usage(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Usage {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
