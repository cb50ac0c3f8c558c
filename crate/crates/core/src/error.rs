use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A caller violated an operation's precondition.
    #[error("usage error: {0}")]
    Usage(String),

    /// The scenario document is not well-formed.
    #[error("parse error: {0}")]
    Parse(String),

    /// The scenario document parsed but describes an invalid problem.
    #[error("validation error at `{field}`: {message}")]
    Validation { field: String, message: String },

    /// Free-space rejection sampling ran out of attempts.
    #[error("free space saturated: no valid sample after {attempts} attempts")]
    Saturation { attempts: usize },
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
