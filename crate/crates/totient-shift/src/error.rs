use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on the arguments was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A computation left the supported 64-bit range. Values are never
    /// silently wrapped; callers must shrink their inputs.
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),

    /// A configured memory or search budget was exhausted.
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    /// An exact re-verification failed. This signals a construction bug,
    /// never an expected runtime path.
    #[error("verification failure: {0}")]
    Verification(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
