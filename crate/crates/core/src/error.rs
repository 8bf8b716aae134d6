use thiserror::Error;

/// Errors shared by every solver, constructor and parser in this crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Shapes, assignment lengths or axis numbers that do not line up.
    #[error("dimension error: {0}")]
    Dimension(String),
    /// A value outside its domain (a sign that is not ±1, a non-finite angle, ...).
    #[error("invalid value: {0}")]
    InvalidValue(String),
    /// The requested enumeration is larger than the configured budget.
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    /// Malformed input document.
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown game: {0}")]
    UnknownGame(String),
    /// A move that does not fit the game mode (a rotation on a classic board).
    #[error("mode mismatch: {0}")]
    ModeMismatch(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
