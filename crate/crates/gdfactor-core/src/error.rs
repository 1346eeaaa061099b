//! Shared error type.

use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A caller-supplied value lies outside the operation's documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An iterative routine exhausted its budget or met unusable input
    /// (e.g. the Jacobi sweep limit).
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// The gradient dynamic produced a non-finite entry; usually means the
    /// stepsize is too large for the spectrum. The trajectory runner fills
    /// in the failing iteration; a bare step reports `None`.
    #[error("numerical overflow{}", .iteration.map(|i| format!(" at iteration {i}")).unwrap_or_default())]
    Overflow { iteration: Option<u64> },

    /// σ_r == σ_{r+1}: the rank-r truncation is not uniquely defined, so no
    /// relative gap (and no schedule) exists at this rank.
    #[error("gap absent at rank {r}: the r-th and (r+1)-th singular values coincide, so the rank-r truncation is not uniquely defined")]
    GapAbsent { r: usize },

    /// A monotone-trend assertion over a schedule family failed.
    #[error("trend violation: {0}")]
    TrendViolation(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::NumericalFailure(msg.into())
    }
}
