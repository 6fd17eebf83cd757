use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: `{field}` {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("insufficient history: at least 2 measurements required, got {0}")]
    InsufficientHistory(usize),

    #[error("degenerate covariance: factorization failed after PSD repair")]
    DegenerateCovariance,

    #[error("zero channel vector")]
    ZeroVector,

    #[error("ill-conditioned channel (condition number {0:.3e})")]
    IllConditioned(f64),

    #[error("TPM fixed point diverged after {0} iterations")]
    TpmDiverged(usize),

    #[error("URLLC target infeasible even alone: gamma_max {gamma_max:.6e} <= gamma_min {gamma_min:.6e}")]
    TargetInfeasible { gamma_min: f64, gamma_max: f64 },

    #[error("no realization produced a certified precoder ({attempted} attempted)")]
    NoCertifiedRealization { attempted: usize },
}

impl Error {
    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field,
            reason: reason.into(),
        }
    }
}
