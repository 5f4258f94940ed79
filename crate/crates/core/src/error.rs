use thiserror::Error;

use crate::closure::Side;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid functions live on different grids")]
    GridMismatch,

    #[error("expected {expected} values for the grid, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("function evaluation is not finite at x = {x}")]
    Evaluation { x: f64 },

    #[error("zero pivot in tridiagonal elimination at row {row}")]
    ZeroPivot { row: usize },

    /// The 3x3 boundary system is (numerically) singular: `12 -/+ 4Dh + Ah^2` vanishes.
    #[error("boundary closure at the {side} endpoint is not solvable: 12 -/+ 4Dh + Ah^2 = {quantity:e}")]
    SolvabilityViolation { side: Side, quantity: f64 },

    #[error("assembly failed: {0}")]
    Assembly(String),

    #[error("singular system: {reason}")]
    SingularSystem { reason: String },

    #[error("solution failed a self-consistency check: {what} deviates by {deviation:e} (relative)")]
    Inconsistent { what: String, deviation: f64 },

    #[error("invalid mesh sequence: {0}")]
    InvalidMeshes(String),

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),
}
