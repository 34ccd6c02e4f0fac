use thiserror::Error;

/// Errors raised while building or solving a d.c. problem instance.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DcError {
    #[error("dimension mismatch in {what}: expected {expected}, got {found}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        found: usize,
    },

    #[error("{matrix} is not symmetric (relative asymmetry {deviation:.3e})")]
    NotSymmetric { matrix: String, deviation: f64 },

    #[error("{matrix} is not positive definite (smallest eigenvalue {eigenvalue})")]
    NotPositiveDefinite { matrix: String, eigenvalue: f64 },

    #[error("problem has no exponential or quartic terms (p + r = 0)")]
    NoCanonicalTerms,

    #[error("non-finite input value in {0}")]
    NonFiniteInput(String),

    #[error("tau[{index}] = {value:e} is not strictly positive")]
    NonPositiveTau { index: usize, value: f64 },

    #[error("exp overflow in term {index}: exponent {exponent:e} exceeds the representable range")]
    ExpOverflow { index: usize, exponent: f64 },

    #[error("G(zeta) is singular at zeta = {zeta:?} (min |eigenvalue| {min_abs_eigenvalue:e})")]
    SingularG {
        zeta: Vec<f64>,
        min_abs_eigenvalue: f64,
    },

    #[error("no point with G(zeta) positive definite found")]
    NoInteriorStart,

    #[error("Newton iteration did not converge in {iterations} steps (|grad|_inf = {grad_norm:e}, zeta = {zeta:?})")]
    MaxIterExceeded {
        iterations: usize,
        grad_norm: f64,
        zeta: Vec<f64>,
    },

    #[error("line search stalled at zeta = {zeta:?} (|grad|_inf = {grad_norm:e})")]
    LineSearchFailed { zeta: Vec<f64>, grad_norm: f64 },

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("oracle limited to n ≤ 3 (got n = {0})")]
    OracleDimension(usize),
}

pub type Result<T> = std::result::Result<T, DcError>;
