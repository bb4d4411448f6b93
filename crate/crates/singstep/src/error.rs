use crate::model::SchemeId;

/// Everything that can go wrong inside the library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("{scheme} step size violation: kappa*tau = {kappa_tau} must be below {limit}")]
    StepSizeViolation {
        scheme: SchemeId,
        kappa_tau: f64,
        limit: f64,
    },

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("singular BDF2 kernel at level {level}")]
    SingularKernel { level: usize },

    #[error("tridiagonal elimination hit a zero pivot in row {row}")]
    LinearSolveFailure { row: usize },

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("degenerate error pair ({coarse:e}, {fine:e}); no order can be formed")]
    DegenerateError { coarse: f64, fine: f64 },

    #[error("scheme {scheme} cannot be applied to this problem: {reason}")]
    SchemeMismatch {
        scheme: SchemeId,
        reason: &'static str,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            reason: "must lie in (0, 1)",
        })
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be positive and finite",
        })
    }
}
