//! Crate-wide error type.

/// Errors produced by model construction, numerical evaluation, estimation,
/// and testing.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested functional needs a finite mean the model does not have.
    #[error("infinite mean: {0}")]
    InfiniteMean(String),

    /// A quantile function failed the strict-monotonicity grid check.
    #[error("non-monotone quantile function: {0}")]
    NonMonotone(String),

    /// An iterative method exhausted its iteration budget.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// Numerical integration did not reach the requested tolerance.
    #[error("quadrature failure: {0}")]
    Quadrature(String),

    /// The upper tail above the requested quantile contains no observations.
    #[error("empty upper tail: k = {k} but sample size is {n}")]
    TailEmpty { k: usize, n: usize },

    /// The threshold order statistic is not positive.
    #[error("zero or negative threshold at the requested quantile")]
    ZeroThreshold,

    /// The requested operation has no solution for the given inputs.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// An invalid configuration value.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A parse failure in a model specification or data file.
    #[error("parse error: {0}")]
    Parse(String),

    /// A rejected row during data ingestion.
    #[error("line {line}: {reason}")]
    Ingest { line: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
