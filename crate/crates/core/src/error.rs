use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An exhaustive oracle was asked to enumerate more than it is allowed to.
    #[error("capacity exceeded: {what} needs {needed} evaluations, limit is {limit}")]
    Capacity {
        what: &'static str,
        needed: u128,
        limit: u128,
    },

    #[error("communication graph is not connected: {0}")]
    Connectivity(String),

    #[error("degenerate function: {0}")]
    Degenerate(String),

    /// Zero per-round time with a finite budget; an explicit round count is required.
    #[error("per-round time is zero, a time budget admits infinitely many rounds")]
    InfiniteRounds,

    #[error("configuration error at {location}: {message}")]
    Config { location: String, message: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn config(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            location: location.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
