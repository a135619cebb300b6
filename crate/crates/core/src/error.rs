use thiserror::Error;

use crate::projection::LinearFit;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite entry at row {row}, column {col}")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("need at least {min} observations, got {got}")]
    TooFewObservations { min: usize, got: usize },

    /// The sample is constant, so S2 = 0 and the test statistic is undefined.
    /// Callers building graphs must record such pairs as untestable rather
    /// than treating them as independent.
    #[error("degenerate sample: S2 = 0 (a sample is constant)")]
    DegenerateSample,

    #[error("alpha must lie in (0, {max}], got {alpha}")]
    InvalidAlpha { alpha: f64, max: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    /// Coordinate descent hit the sweep limit; the last iterate is attached
    /// so callers can inspect how far the solver got.
    #[error("coordinate descent did not converge within {sweeps} sweeps")]
    ConvergenceFailure { sweeps: usize, last: Box<LinearFit> },

    #[error("invalid pair: node indices must differ (got {index})")]
    InvalidPair { index: usize },

    #[error("external factor mode requires at least one factor column")]
    EmptyFactorSet,

    #[error("AUC undefined: {0}")]
    AucUndefined(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
