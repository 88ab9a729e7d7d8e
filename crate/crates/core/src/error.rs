use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("point ({x}, {y}) lies outside block {block}")]
    DomainViolation { block: String, x: f64, y: f64 },

    #[error("{what} did not converge: {detail}")]
    NonConvergence { what: &'static str, detail: String },

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("singular effective mass at x = {x}: denominator {denominator}")]
    SingularMass { x: f64, denominator: f64 },

    #[error("implicit step failed at t = {t} after {iterations} iterations")]
    StepRejected { t: f64, iterations: usize },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures that stem from numerical convergence rather than
    /// from invalid input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::StepRejected { .. }
                | Error::LinearSolve(_)
                | Error::SingularMass { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
