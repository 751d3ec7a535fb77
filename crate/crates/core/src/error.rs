use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument fell outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Scenario parameters violate a structural invariant.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// An iterative or adaptive routine exhausted its budget.
    #[error("{routine} did not converge within {budget} steps")]
    NonConvergence { routine: &'static str, budget: usize },

    /// A channel vector had zero norm.
    #[error("degenerate channel realization: zero-norm channel vector")]
    DegenerateChannel,

    /// The weak user cannot be reached with finite power.
    #[error("minimal power is unbounded for this realization")]
    Unreachable,

    #[error("unsupported confidence level {0}; use 0.95 or 0.99")]
    UnsupportedConfidence(f64),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParams(msg.into())
    }

    /// True for failures of a numerical routine rather than of the caller's input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. } | Error::DegenerateChannel | Error::Unreachable
        )
    }
}
