use thiserror::Error;

/// Errors surfaced by every module of the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid field description: {0}")]
    InvalidField(String),
    #[error("operands live in different fields")]
    FieldMismatch,
    #[error("division by zero")]
    DivisionByZero,
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("expected a unit: {0}")]
    NonUnit(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("singular matrix")]
    SingularMatrix,
    #[error("malformed ball: {0}")]
    MalformedBall(String),
    #[error("point is not in the upper half plane at working precision")]
    NotInUpperHalfPlane,
    #[error("depth exceeded: {0}")]
    DepthExceeded(String),
    #[error("rank mismatch: expected {expected}, got {got}")]
    RankMismatch { expected: usize, got: usize },
    #[error("Schottky certification failed: {0}")]
    PingPong(String),
    #[error("degenerate ord matrix")]
    DegenerateOrd,
    #[error("not ordinary: {0}")]
    NotOrdinary(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
