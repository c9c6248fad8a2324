use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degree must be at least 2 (got {0})")]
    InvalidDegree(u32),

    #[error("arc endpoints coincide at {0}")]
    InvalidArc(String),

    #[error("{0} is not a root angle of a hyperbolic component")]
    NotARoot(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("linked classes: {0}")]
    Linked(String),

    #[error("tree is not closed under the induced map: {0}")]
    NonMarkov(String),

    #[error("power iteration did not converge after {iterations} steps (bracket [{lower}, {upper}])")]
    Convergence {
        iterations: usize,
        lower: f64,
        upper: f64,
    },

    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
