use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A code or precoder failed one of the structural checks.
    #[error("validation failed: {0}")]
    Validation(String),

    /// Both inputs of a quaternary split assign zero mass to every symbol
    /// consistent with the decided value.
    #[error("degenerate message: zero normalizer")]
    DegenerateMessage,

    /// Every path of the list decoder became degenerate.
    #[error("decode failure: no surviving path")]
    DecodeFailure,

    #[error("parse error at `{field}`: {message}")]
    Parse { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            field: field.into(),
            message: message.into(),
        }
    }
}
