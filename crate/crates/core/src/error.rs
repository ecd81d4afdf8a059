use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument violates a documented invariant.
    #[error("invalid {field}: {reason}")]
    Invalid { field: &'static str, reason: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A pose configuration violates a feasibility constraint.
    #[error("infeasible configuration: {0}")]
    Infeasible(String),

    /// The sensing geometry carries no angular information about a target.
    #[error("target {target} is unidentifiable (zero channel derivative)")]
    Unidentifiable { target: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid { field, reason: reason.into() }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
