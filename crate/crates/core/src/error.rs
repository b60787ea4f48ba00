use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid knot configuration: {0}")]
    InvalidKnots(String),

    #[error("x = {x} lies outside the spline domain [{a}, {b}]")]
    OutOfDomain { x: f64, a: f64, b: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-positive density value {value} at grid index {index}")]
    NonPositiveDensity { index: usize, value: f64 },

    #[error("grids differ")]
    GridMismatch,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error(
        "collocation matrix is rank deficient ({rank} < {required}); \
         the abscissae violate the Schoenberg-Whitney interleaving condition"
    )]
    SchoenbergWhitney { rank: usize, required: usize },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("degenerate GCV: trace(H) = {trace} >= n = {n}")]
    DegenerateGcv { trace: f64, n: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}
