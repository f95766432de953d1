use thiserror::Error;

/// Errors produced while building or applying quadrature rules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported weight: {0}")]
    UnsupportedWeight(String),

    #[error("recurrence discretization did not converge: {0}")]
    ConvergenceFailure(String),

    #[error("tridiagonal eigensolver failed to converge at index {index}")]
    EigenFailure { index: usize },

    #[error("budget {budget} is too small: the smallest admissible rule has {required} nodes")]
    BudgetTooSmall { budget: usize, required: usize },

    #[error("integrand returned a non-finite value {value} at node {node:?}")]
    NonFiniteIntegrand { node: Vec<f64>, value: f64 },

    #[error("the weight vanishes at node {0}; use the unweighted evaluation path")]
    ZeroWeightNode(f64),

    #[error("SVG export needs d = 2, got d = {0}")]
    SvgDimension(usize),

    #[error("internal pigeonhole violation: {0}")]
    InternalPigeonholeViolation(String),

    #[error("adaptive quadrature did not reach tolerance {tol:e} on [{lo}, {hi}] (estimate {estimate:e})")]
    AdaptiveQuadrature {
        lo: f64,
        hi: f64,
        tol: f64,
        estimate: f64,
    },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
