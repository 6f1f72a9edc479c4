use thiserror::Error;

/// Errors produced by the ford-core library.
#[derive(Debug, Error)]
pub enum Error {
    /// The Ford parameter must lie in `[0, 1]`.
    #[error("alpha must lie in [0, 1], got {0}")]
    AlphaOutOfRange(f64),
    /// A malformed alpha literal (neither a decimal nor `p/q`).
    #[error("cannot parse alpha from {0:?} (expected a decimal or a rational p/q)")]
    ParseAlpha(String),
    /// An id that does not name an edge of the tree.
    #[error("unknown edge id {0}")]
    UnknownEdge(u32),
    /// Operation is singular at an endpoint of the parameter range.
    #[error("operation undefined at alpha = {0}; requires alpha strictly inside (0, 1)")]
    EndpointAlpha(f64),
    /// The closed-form eigensystem failed its residual validation.
    #[error("eigensystem residual {residual:e} exceeds tolerance {tol:e}")]
    EigenResidual { residual: f64, tol: f64 },
    /// Closed-form and spectral covariance routes disagree.
    #[error("covariance routes disagree by {0:e}")]
    CovarianceMismatch(f64),
    /// A probability table lost or gained mass.
    #[error("pmf normalization drifted by {0:e}")]
    NormalizationDrift(f64),
    /// Bisection bracket does not straddle a sign change.
    #[error("no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    /// Correlation of degenerate (constant) statistics.
    #[error("correlation undefined at alpha = 1 (degenerate comb model)")]
    DegenerateCorrelation,
    /// A factor of a gamma-ratio product is zero or changes sign.
    #[error("nonpositive factor at i = {0} in gamma-ratio product")]
    NonpositiveFactor(u64),
    /// Summaries or tables with different `(n, alpha)` cannot be compared.
    #[error("mismatched comparison: {0}")]
    Mismatch(String),
    /// Invalid Monte Carlo configuration.
    #[error("invalid trial configuration: {0}")]
    InvalidConfig(String),
}
