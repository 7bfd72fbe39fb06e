use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter violates an operation's precondition.
    #[error("invalid `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// Surface frequencies beyond what the sampling grid (or the quadrature) can resolve.
    #[error("unresolvable frequency: {0}")]
    Unresolvable(String),

    #[error("operator too large for dense materialization: {nodes} nodes (cap {cap})")]
    TooLarge { nodes: usize, cap: usize },

    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    /// A run completed but one of its honesty diagnostics exceeded its threshold.
    #[error("diagnostic `{name}` = {value:.4e} exceeds threshold {threshold:.4e}")]
    DiagnosticViolation {
        name: &'static str,
        value: f64,
        threshold: f64,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }
}
