use thiserror::Error;

/// Errors raised by the tamper-detection toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("size limit exceeded: {what} needs {entries} entries, ceiling is {limit}")]
    SizeLimit {
        what: String,
        entries: u128,
        limit: u128,
    },

    #[error("non-finite matrix entry at flat index {0}")]
    NonFinite(usize),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported twirl order {0}: closed forms exist only for k = 1 and k = 2")]
    UnsupportedOrder(usize),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid scheme: {0}")]
    InvalidScheme(String),

    #[error("family error: {0}")]
    Family(String),

    #[error("scheme has a single message, there is no victim to attack")]
    NoVictim,

    #[error("no ancilla: 2^k = {messages} must be strictly smaller than d = {d}")]
    NoAncilla { messages: usize, d: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("delta-net construction failed: {0}")]
    NetConstruction(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
