//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A point was inserted with the opposite of its recorded label.
    #[error("clean-label violation: point already recorded with the opposite label")]
    CleanLabelViolation,
    /// The adversary or learner broke the game's rules mid-episode.
    #[error("protocol violation: {0}")]
    ProtocolViolation(String),
    /// Input outside the operation's domain (dimension, sign, unknown node).
    #[error("domain error: {0}")]
    Domain(String),
    /// A documented precondition does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// A pair collapsed to a single point where two were required.
    #[error("degenerate pair: identical points")]
    DegeneratePair,
    /// Structured input (tree, table, wrapper) is internally inconsistent.
    #[error("structure error: {0}")]
    Structure(String),
    /// Bad or contradictory configuration.
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
