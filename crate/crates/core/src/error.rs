use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("element {index} out of range for ground set of size {n}")]
    OutOfRange { index: usize, n: usize },
    #[error("element {0} appears more than once in the set")]
    DuplicateElement(usize),
    #[error("element {0} is already in the context set")]
    ElementInContext(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("constraint admits no feasible set")]
    Infeasible,
    #[error("negative cost {cost} on element {index}")]
    NegativeCost { index: usize, cost: f64 },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
