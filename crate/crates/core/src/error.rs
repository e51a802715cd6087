use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Invalid parameters or inputs that violate an operation's preconditions.
    #[error("domain error: {0}")]
    Domain(String),

    /// A basis state was looked up in a sector it does not belong to.
    #[error("state {bits:#b} is not a member of sector (N={n_sites}, 2L={two_l})")]
    Lookup { bits: u64, n_sites: usize, two_l: i32 },

    /// The requested computation needs more than the configured resources
    /// (dense threshold exceeded, partial eigensystem where a full one is required).
    #[error("capacity error: {0}")]
    Capacity(String),

    #[error("solver did not converge after {iterations} iterations (best residual {best_residual:.3e})")]
    Convergence { iterations: usize, best_residual: f64 },
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
