use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("value {value} is outside the range of the table ({min}..{max})")]
    OutOfRange { value: f64, min: f64, max: f64 },
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("too few resolved values: need {needed}, have {have}")]
    TooFewResolved { needed: usize, have: usize },
    #[error("event {index} is not a recurrence: d = {distance} >= epsilon = {epsilon}")]
    MalformedEvent {
        index: usize,
        distance: f64,
        epsilon: f64,
    },
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("hypothesis failed: {0}")]
    HypothesisFailed(String),
    #[error("isometry is not hyperbolic (|trace| = {0})")]
    NotHyperbolic(f64),
    #[error("point outside the upper half-plane: {0}")]
    DomainError(String),
    #[error("search tree exhausted at depth {max_depth}")]
    Exhausted { max_depth: usize },
    #[error("search budget of {nodes} nodes exceeded at depth {max_depth}")]
    BudgetExceeded { nodes: usize, max_depth: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
