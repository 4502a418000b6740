use thiserror::Error;

/// Errors raised by the numerical routines and the physics layers on top of them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(
        "quadrature budget exhausted after {cells} cells: partial value {partial} with error estimate {error_estimate:e}"
    )]
    QuadratureBudget {
        partial: f64,
        error_estimate: f64,
        cells: usize,
    },

    #[error("requested tolerance {requested:e} not met: error estimate {achieved:e}")]
    ToleranceNotMet { requested: f64, achieved: f64 },

    #[error(
        "summation did not converge within {terms} terms (partial sum {partial}, tail estimate {tail_estimate:e})"
    )]
    NonConvergence {
        terms: u64,
        partial: f64,
        tail_estimate: f64,
    },

    #[error("ill-conditioned fit: condition number {condition:e}")]
    IllConditioned { condition: f64 },

    #[error("fit residual {residual:e} exceeds tolerance {tolerance:e}")]
    FitResidual { residual: f64, tolerance: f64 },

    #[error("no physical solution: {0}")]
    NoPhysicalSolution(String),

    #[error("finite-part routes disagree: analytic {analytic:e}, fitted {fitted:e}")]
    RouteDisagreement { analytic: f64, fitted: f64 },
}

impl Error {
    /// Short machine-readable tag, used in CLI error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::QuadratureBudget { .. } => "quadrature_budget",
            Error::ToleranceNotMet { .. } => "tolerance_not_met",
            Error::NonConvergence { .. } => "non_convergence",
            Error::IllConditioned { .. } => "ill_conditioned",
            Error::FitResidual { .. } => "fit_residual",
            Error::NoPhysicalSolution(_) => "no_physical_solution",
            Error::RouteDisagreement { .. } => "route_disagreement",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn require_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must be finite, got {value}")))
    }
}

pub(crate) fn require_positive(name: &str, value: f64) -> Result<()> {
    require_finite(name, value)?;
    if value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must be positive, got {value}")))
    }
}

pub(crate) fn require_non_negative(name: &str, value: f64) -> Result<()> {
    require_finite(name, value)?;
    if value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must be non-negative, got {value}")))
    }
}
