use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}-D site against {1}-D site")]
    DimensionMismatch(usize, usize),
    #[error("boundary cutoff {cutoff} is smaller than the window diameter {diameter}")]
    CutoffTooSmall { cutoff: i64, diameter: i64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("configuration does not carry a plus boundary condition")]
    NotPlusBoundary,
    #[error("step budget of {0} exceeded")]
    StepBudgetExceeded(usize),
    #[error("instance of size {size} exceeds the exhaustive limit {limit}")]
    SizeGuard { size: usize, limit: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("empty set where a nonempty one is required")]
    EmptySet,
    #[error("label not constant on the inner boundary of a complement component")]
    LabelNotConstant,
    #[error("contour does not belong to the configuration")]
    ContourNotFound,
    #[error("cached local field drifted by {0:e}")]
    CacheIncoherent(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
