use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A clopen index or stage could not be resolved within the configured caps.
    #[error("depth exhausted: {0}")]
    DepthExhausted(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    /// An internal consistency check failed. This always indicates a bug.
    #[error("certificate failure: {0}")]
    CertificateFailure(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("invalid input: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DepthExhausted(_) => "depth_exhausted",
            Error::PreconditionViolated(_) => "precondition_violated",
            Error::CertificateFailure(_) => "certificate_failure",
            Error::Validation(_) => "validation",
            Error::Input(_) => "input",
        }
    }
}

macro_rules! precondition {
    ($cond:expr, $($arg:tt)+) => {
        if !$cond {
            return Err($crate::error::Error::PreconditionViolated(format!($($arg)+)));
        }
    };
}

macro_rules! certify {
    ($cond:expr, $($arg:tt)+) => {
        if !$cond {
            return Err($crate::error::Error::CertificateFailure(format!($($arg)+)));
        }
    };
}

pub(crate) use certify;
pub(crate) use precondition;
