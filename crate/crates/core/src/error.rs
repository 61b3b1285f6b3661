use thiserror::Error;

/// Errors produced by the solvers and the verification engines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter or argument violates its domain constraint.
    #[error("domain error in `{field}`: {reason}")]
    Domain { field: &'static str, reason: String },

    /// An operation was called outside the parameter range it is defined for.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Cases V and VI can only be told apart once the exit trigger is known.
    #[error("exit trigger required to separate entry cases V and VI")]
    MissingTrigger,

    /// An iterative solver did not reach its tolerance.
    #[error("convergence failure in {solver}: {detail}")]
    Convergence { solver: &'static str, detail: String },

    /// Invalid Monte Carlo or finite-difference configuration.
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn convergence(solver: &'static str, detail: impl Into<String>) -> Self {
        Error::Convergence {
            solver,
            detail: detail.into(),
        }
    }
}
