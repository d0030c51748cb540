use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid convex body: {0}")]
    InvalidOmega(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("ball of radius {radius} around {center:?} contains no lattice point to average")]
    EmptyBall { center: Vec<f64>, radius: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("window of {points} points exceeds the budget of {budget} points")]
    WindowTooLarge { points: u128, budget: u128 },

    #[error("non-finite value {value} at {point:?}")]
    NonFinite { point: Vec<i64>, value: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("exact non-centered evaluation is only available for d = 1 or the cube (d = {dim})")]
    ExactnessUnavailable { dim: usize },

    #[error("no lattice-count constant c1 <= {r_max} satisfies the sandwich bounds")]
    ConstantFit { r_max: f64 },

    #[error("tail bound requires a larger truncation: {0}")]
    Truncation(String),

    #[error("perturbation schedule must have strictly decreasing l1 norms (index {index})")]
    Schedule { index: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
