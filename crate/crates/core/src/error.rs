use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("validation: {0}")]
    Validation(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("not synthesizable: residual {residual}")]
    Unsynthesizable { residual: f64 },
    #[error("routing: {0}")]
    Routing(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("internal consistency: {0}")]
    Internal(String),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn budget(msg: impl Into<String>) -> Self {
        Error::Budget(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
