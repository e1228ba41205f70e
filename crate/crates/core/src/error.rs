use thiserror::Error;

/// Errors raised anywhere in the simulator and analysis toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A quantity is mathematically undefined for the given input (e.g. a
    /// ratio with a zero denominator).
    #[error("undefined value: {0}")]
    Undefined(String),

    /// Measured data contradict the model assumptions (e.g. Y <= 1 with a
    /// hotter hot load).
    #[error("inconsistent data: {0}")]
    InconsistentData(String),

    #[error("fit failure: {0}")]
    FitFailure(String),

    /// A scenario configuration failed validation. `field` is the dotted
    /// path of the offending key.
    #[error("invalid configuration field `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn field(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
