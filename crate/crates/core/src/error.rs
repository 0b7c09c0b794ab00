use alloc::string::String;

use crate::conic::SolveStatus;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Sizes of vectors or matrices do not agree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    /// A value lies outside the set the operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),
    /// A point violates `|w| <= |v|` beyond tolerance.
    #[error("infeasible point: |w[{index}]| exceeds |v[{index}]| by {excess:e}")]
    Infeasible { index: usize, excess: f64 },
    /// Builder inputs are inconsistent (e.g. unbalanced sources).
    #[error("inconsistent input: {0}")]
    Inconsistent(String),
    /// A linear system that must be nonsingular is (numerically) singular.
    #[error("singular system: {0}")]
    Singular(String),
    /// Descent could not start.
    #[error("initialization failed: {0}")]
    Initialization(String),
    /// A result was used in a state it does not support.
    #[error("invalid state: {0}")]
    State(String),
    /// The solver finished without an optimal status.
    #[error("solver returned {0:?}")]
    Solver(SolveStatus),
    /// Enumeration size above the configured cap.
    #[error("refusing to enumerate 2^{m} sign patterns (cap is 2^{max_m})")]
    TooLarge { m: usize, max_m: usize },
    /// Every sign pattern of an enumeration was infeasible.
    #[error("no feasible sign pattern")]
    NoFeasiblePattern,
}
