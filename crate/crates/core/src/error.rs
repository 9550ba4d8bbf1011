use thiserror::Error;

pub type Point = [f64; 3];

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("field length {got} does not match grid size {expected}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("newton projection from {point:?} did not converge after {iterations} iterations (residual {residual:e})")]
    NewtonFailed {
        point: Point,
        iterations: usize,
        residual: f64,
    },

    #[error("ray construction failed at grid index {index}")]
    RayFailed {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("point {0:?} lies outside the swept waveguide band")]
    OutsideBand(Point),

    #[error("penalty band and PML slabs overlap (max chi*(sigma_x+sigma_y) = {0})")]
    PenaltyPmlOverlap(f64),

    #[error("non-finite field value at step {step} (t = {t})")]
    NonFinite { step: usize, t: f64 },

    #[error("right-hand side failed the linearity spot check (relative defect {0:e})")]
    NonLinear(f64),

    #[error("eigensolver failed: {0}")]
    Eigen(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
