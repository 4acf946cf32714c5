use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lag {lag}: must be smaller than the series length {len}")]
    InvalidLag { lag: usize, len: usize },

    #[error("invalid length: {0}")]
    InvalidLength(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("model is not stationary: companion spectral radius {radius:.6} is not below 1")]
    NonStationary { radius: f64 },

    #[error("conditioning failure at frequency index {index}: {detail}")]
    Conditioning { index: usize, detail: String },

    #[error(
        "block Toeplitz covariance is not positive definite (failed at block {block}); \
         floor the spectrum with pd_truncate before factorizing"
    )]
    NotPositiveDefinite { block: usize },

    #[error("spectral root is not invertible at frequency index {index} (condition number {cond:.3e})")]
    NonInvertibleRoot { index: usize, cond: f64 },

    #[error("frequency response is not conjugate symmetric (imaginary residue {residue:.3e})")]
    SymmetryViolation { residue: f64 },

    #[error("numerical consistency failure: {0}")]
    Numerical(String),

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerical pipeline, as opposed to bad input or IO.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonStationary { .. }
                | Error::Conditioning { .. }
                | Error::NotPositiveDefinite { .. }
                | Error::NonInvertibleRoot { .. }
                | Error::SymmetryViolation { .. }
                | Error::Numerical(_)
                | Error::UndefinedMetric(_)
        )
    }
}
