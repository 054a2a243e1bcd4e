use thiserror::Error;

/// Errors surfaced by the toolkit.
///
/// The CLI maps these onto exit codes: `Input` and `Decode` are caller
/// mistakes (exit 2), `Resource` means a documented size guard tripped
/// (exit 3), `Internal` and `Verification` mean a machine-checked claim
/// failed and should be treated as a bug (exit 1).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("resource guard exceeded: {0}")]
    Resource(String),

    #[error("decode error: {0}")]
    Decode(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }

    pub fn decode(msg: impl Into<String>) -> Self {
        Error::Decode(msg.into())
    }

    pub fn verification(msg: impl Into<String>) -> Self {
        Error::Verification(msg.into())
    }

    pub fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }
}
