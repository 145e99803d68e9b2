use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: String, found: String },

    #[error("cannot step a path that is already in the cemetery state")]
    DeadState,

    #[error("history has {available} steps but {required} are required")]
    HistoryTooShort { available: usize, required: usize },

    #[error("holder fit needs at least 4 valid lags, found {0}")]
    TooFewLags(usize),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("path never reached level {0}")]
    NoCrossing(f64),

    #[error("grid too large: nx = {0} exceeds 2^16")]
    MemoryGuard(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
