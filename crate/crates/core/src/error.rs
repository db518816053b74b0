use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument violates an operation precondition.
    #[error("domain error: {0}")]
    Domain(String),
    /// The request is outside the regime the closed forms cover (h != 0).
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),
    /// The request would exceed an enumeration or simulation cap.
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }
}
