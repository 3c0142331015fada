use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh size h = {h} does not divide the domain extent {extent} into an integer number of cells")]
    NonDivisibleMesh { extent: f64, h: f64 },

    #[error("invalid mesh parameters: {0}")]
    InvalidMesh(String),

    #[error("index {index} out of range (len {len}) for {what}")]
    OutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("point ({x}, {y}) lies outside {what}")]
    PointOutside { x: f64, y: f64, what: &'static str },

    #[error("degenerate triangle {triangle}: |det B| = {det:e}")]
    DegenerateTriangle { triangle: usize, det: f64 },

    #[error("singular reference functional matrix (Argyris degree-of-freedom definition error)")]
    SingularReference,

    #[error("unsupported quadrature degree {0} (supported range 1..=20)")]
    UnsupportedQuadrature(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("numerically singular matrix at pivot {pivot}")]
    SingularMatrix { pivot: usize },

    #[error("linear solve residual {residual:e} exceeds tolerance {tolerance:e}")]
    InaccurateSolve { residual: f64, tolerance: f64 },

    #[error("unknown manufactured solution id '{0}'")]
    UnknownSolution(String),

    #[error("unknown model '{0}'")]
    UnknownModel(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Newton iteration failed: {0}")]
    Newton(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
