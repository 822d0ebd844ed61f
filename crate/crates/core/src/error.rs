use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point at distance {distance} lies outside the unique-closest-point tube (reach {reach})")]
    ReachViolation { distance: f64, reach: f64 },

    #[error("point is not on the surface (residual {residual:e})")]
    OffSurface { residual: f64 },

    #[error("non-parallelity violated: |sigma^T n| = {value:e} is below {threshold:e}")]
    DegenerateDiffusion { value: f64, threshold: f64 },

    #[error(
        "inverse transform did not converge in {iterations} iterations (last step {last_step:e}); bump scale too large"
    )]
    InversionFailed { iterations: usize, last_step: f64 },

    #[error("no bump scale in the search grid makes the transform a contraction")]
    SearchExhausted,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite state at step {step}")]
    NonFiniteState { step: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("need k_max - k_min >= 2, got levels {k_min}:{k_max}")]
    InsufficientLevels { k_min: u32, k_max: u32 },

    #[error("cannot fit an exponent: {0}")]
    DegenerateFit(String),

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
