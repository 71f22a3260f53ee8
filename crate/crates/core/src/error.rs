use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e}, tolerance {tolerance:.3e})")]
    NotHermitian { asymmetry: f64, tolerance: f64 },
    #[error("non-finite matrix entry")]
    NonFinite,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("eigensolver failed to converge")]
    NoConvergence,
    #[error("matrix is singular: {0}")]
    Singular(String),
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("curve is open: {0}")]
    OpenCurve(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NoConvergence | Error::Singular(_) | Error::Degenerate(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
