use thiserror::Error;

/// Error type shared by every module of the crate.
///
/// The variants map onto the process exit codes used by the CLI:
/// domain/construction errors exit 1, configuration errors exit 2,
/// resource errors exit 3.
#[derive(Debug, Error)]
pub enum Error {
    /// Precondition violation: the inputs are outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// A construction (spec, trim parameter, ...) could not be completed.
    #[error("construction error: {0}")]
    Construction(String),
    /// A numeric procedure failed to converge or bracket.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// A configured cap (group size, enumeration budget, ...) was exceeded.
    #[error("resource error: {0}")]
    Resource(String),
    /// Malformed configuration or input document.
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn construction(msg: impl Into<String>) -> Self {
        Error::Construction(msg.into())
    }
    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
    pub fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Exit code the CLI maps this error to.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Construction(_) | Error::Numeric(_) => 1,
            Error::Config(_) => 2,
            Error::Resource(_) => 3,
        }
    }
}
