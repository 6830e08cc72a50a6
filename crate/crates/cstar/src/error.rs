//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by library operations.
///
/// Every variant names the operation (or precondition) that failed so the
/// CLI can report domain errors with their origin.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{op}: expected a square matrix, got {rows}x{cols}")]
    NonSquare { op: &'static str, rows: usize, cols: usize },

    #[error("{op}: dimension mismatch ({detail})")]
    ShapeMismatch { op: &'static str, detail: String },

    #[error("{op}: matrix contains a non-finite entry")]
    NonFinite { op: &'static str },

    #[error("{op}: invalid argument: {detail}")]
    InvalidArgument { op: &'static str, detail: String },

    #[error("{op}: input is not normal (||aa* - a*a|| = {defect:.3e} exceeds tolerance {tol:.3e})")]
    NotNormal { op: &'static str, defect: f64, tol: f64 },

    #[error("{op}: input is not positive")]
    NotPositive { op: &'static str },

    #[error("{op}: input is numerically singular (min singular value {sigma_min:.3e} <= tolerance {tol:.3e})")]
    Singular { op: &'static str, sigma_min: f64, tol: f64 },

    #[error("{op}: scalar function `{name}` is undefined at eigenvalue {re}+{im}i")]
    FunctionUndefined { op: &'static str, name: String, re: f64, im: f64 },

    #[error("{op}: input is not an idempotent (||e^2 - e|| = {defect:.3e})")]
    NotIdempotent { op: &'static str, defect: f64 },

    #[error("{op}: input is not a projection (defect {defect:.3e})")]
    NotProjection { op: &'static str, defect: f64 },

    #[error("{op}: element does not lie in the algebra's span (residual {residual:.3e})")]
    NotInAlgebra { op: &'static str, residual: f64 },

    #[error("{op}: algebra is not unital")]
    NotUnital { op: &'static str },

    #[error("{op}: generated span exceeded ambient dimension bound {bound} (numerical rank misjudgment)")]
    DimensionGrowth { op: &'static str, bound: usize },

    #[error("{op}: generic-element retry budget of {budget} exhausted")]
    RetryBudgetExhausted { op: &'static str, budget: usize },

    #[error("{op}: eigenvalue iteration failed to converge")]
    NonConvergence { op: &'static str },

    #[error("{op}: certification failed: {detail}")]
    CertificationFailed { op: &'static str, detail: String },

    #[error("{op}: not a valid group table: {detail}")]
    InvalidGroupTable { op: &'static str, detail: String },

    #[error("{op}: the two elements belong to different groups")]
    GroupMismatch { op: &'static str },

    #[error("{op}: group is not abelian")]
    NotAbelian { op: &'static str },

    #[error("{op}: the given subset is not a subgroup ({detail})")]
    NotSubgroup { op: &'static str, detail: String },

    #[error("{op}: functional is not a state: {detail}")]
    NotState { op: &'static str, detail: String },

    #[error("{op}: map fails *-homomorphism certification (worst residual {residual:.3e})")]
    NotHomomorphism { op: &'static str, residual: f64 },

    #[error("{op}: representation is degenerate; the corner 1 - pi(1) has rank {corner_rank}")]
    DegenerateRepresentation { op: &'static str, corner_rank: usize },

    #[error("{op}: covariance identity violated for group element {element} (residual {residual:.3e})")]
    CovarianceViolation { op: &'static str, element: usize, residual: f64 },

    #[error("{op}: action does not leave the algebra invariant (element {element}, residual {residual:.3e})")]
    ActionNotInvariant { op: &'static str, element: usize, residual: f64 },

    #[error("{op}: level {level} out of range (diagram has {levels} levels)")]
    LevelOutOfRange { op: &'static str, level: usize, levels: usize },

    #[error("{op}: quotient image is not unitary on block {block} (defect {defect:.3e})")]
    QuotientNotUnitary { op: &'static str, block: usize, defect: f64 },

    #[error("{op}: rank decision ambiguous: values {low:.3e} and {high:.3e} do not split by the required gap")]
    RankGap { op: &'static str, low: f64, high: f64 },
}
