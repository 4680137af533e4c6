use thiserror::Error;

/// Errors raised by the numeric kernels, models and estimators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TailError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: estimate {estimate:e}, error bound {error:e}")]
    Accuracy { estimate: f64, error: f64 },

    #[error("no bracket found for target {target} after {expansions} expansions")]
    NoBracket { target: f64, expansions: usize },

    #[error("function is not monotone on [{lo}, {hi}]")]
    NonMonotone { lo: f64, hi: f64 },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("inclusion-exclusion over d = {d} margins exceeds the d <= 20 budget")]
    CombinatorialBudget { d: usize },

    #[error("bad evaluation point: {0}")]
    EvaluationPoint(String),
}

impl TailError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        TailError::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, TailError>;
