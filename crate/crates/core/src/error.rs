use thiserror::Error;

use crate::grid::Violation;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("instance is invalid: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidInstance(Vec<Violation>),
    #[error("more than {limit} simple cycles in the reduced graph")]
    CycleBudgetExceeded { limit: usize },
    #[error("{0}")]
    Domain(String),
    #[error("unknown {kind} '{id}'")]
    UnknownId { kind: &'static str, id: String },
    #[error("scenario {scenario} references unknown edge '{edge}'")]
    UnknownScenarioEdge { scenario: usize, edge: String },
    #[error("design is inconsistent with the instance: {0}")]
    InvalidDesign(String),
    #[error("{binaries} free first-stage binaries exceed the enumeration budget of {limit}")]
    TooLarge { binaries: usize, limit: usize },
    #[error("solver failed: {0}")]
    Solver(String),
    #[error(transparent)]
    Milp(#[from] gridforge_milp::MilpError),
}
