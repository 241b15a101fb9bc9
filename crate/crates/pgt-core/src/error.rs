//! Error type shared by the whole crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    /// Lexical or grammatical error in an expression source string.
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    /// A variable reference whose indices fall outside the declared game
    /// dimensions, e.g. `x[4][1]` in a 3-player game.
    #[error("unknown variable at byte {offset}: {message}")]
    UnknownVariable { offset: usize, message: String },

    /// Evaluation outside a function's real domain (negative sqrt argument,
    /// fractional power of a negative base).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("division by zero while evaluating `{0}`")]
    DivisionByZero(String),

    /// Game-spec file violates the schema; `path` points at the offending key.
    #[error("schema violation at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A strategy (or one of its actions) is not a member of the declared
    /// action spaces.
    #[error("strategy outside action space: {0}")]
    OutOfSpace(String),

    /// An intermediate profile of a deviation path leaves the joint action
    /// set; reports the offending step.
    #[error("path leaves the action space at step {step}: {message}")]
    PathLeavesSpace { step: usize, message: String },

    /// An operation's applicability gate is violated (e.g. a construction
    /// that needs a symmetric action set containing zero).
    #[error("inapplicable: {0}")]
    Inapplicable(String),

    #[error("problem size exceeds guard: {size} > {limit}")]
    SizeGuard { size: u128, limit: u128 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialization(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
