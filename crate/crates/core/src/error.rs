use thiserror::Error;

/// Errors produced by the simulation and evaluation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// An input violated a physical or mathematical precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration value or combination is invalid.
    #[error("config error: {0}")]
    Config(String),

    /// Vector lengths did not match.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// A computed quantity hit a singular point (for example zero current
    /// at nonzero probe voltage).
    #[error("singularity: {0}")]
    Singularity(String),

    /// A corner name was not present in the corner table.
    #[error("unknown process corner: {0}")]
    UnknownCorner(String),

    /// An operation that needs data received none.
    #[error("empty input: {0}")]
    Empty(&'static str),

    /// A persisted file did not match the expected schema.
    #[error("schema mismatch: {0}")]
    Schema(String),

    /// A persisted file failed to parse.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
