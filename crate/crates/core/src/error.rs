//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by series construction, the statistic, the limit-law
/// machinery, and the generators.
#[derive(Debug, Error)]
pub enum Error {
    #[error("series value at index {index} is not finite")]
    NonFiniteValue { index: usize },

    #[error("series length {n} is too short (need at least {min})")]
    SeriesTooShort { n: usize, min: usize },

    #[error("block length {ell} is invalid (need ell >= 2)")]
    InvalidLength { ell: usize },

    #[error("block length {ell} leaves fewer than 2 blocks for n = {n}")]
    BlockTooLong { n: usize, ell: usize },

    #[error("memory parameter d = {d} outside the open interval (-1/2, 3/2)")]
    MemoryParamOutOfRange { d: f64 },

    #[error("frequency index j = {j} out of range for length {len} (need 1 <= j < len/2)")]
    FrequencyOutOfRange { j: usize, len: usize },

    #[error("invalid test configuration: {reason}")]
    ConfigError { reason: String },

    #[error("adaptive quadrature failed to reach tol {tol:e} within {budget} kernel evaluations")]
    QuadratureNonConvergence { tol: f64, budget: u64 },

    #[error("operation requires d in (-1/2, 1/2), got d = {d}")]
    RegimeError { d: f64 },

    #[error("limit covariance failed a positivity check: {reason}")]
    NotPositiveDefinite { reason: String },

    #[error("symmetric eigensolver did not converge")]
    EigenFailure,

    #[error("characteristic-function inversion failed: {reason}")]
    InversionFailure { reason: String },

    #[error("block-average periodogram at frequency index j = {j} is zero")]
    DegenerateDenominator { j: usize },

    #[error("circulant embedding produced negative eigenvalues (min {min_eigenvalue:e})")]
    EmbeddingFailure { min_eigenvalue: f64 },

    #[error("invalid generator specification: {reason}")]
    DgpSpecError { reason: String },

    #[error("could not parse input line {line}: {content:?}")]
    ParseError { line: usize, content: String },

    #[error("invalid experiment plan: {reason}")]
    PlanError { reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
