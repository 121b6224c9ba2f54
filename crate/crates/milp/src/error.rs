use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MilpError {
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("value {value} outside the bounds of variable {name}")]
    ValueOutOfBounds { name: String, value: f64 },
    #[error("variable {0} has inconsistent bounds")]
    InvalidBounds(String),
    #[error("names collide after MPS sanitisation: {0}")]
    NameCollision(String),
    #[error("MPS parse error on line {line}: {message}")]
    MpsParse { line: usize, message: String },
    #[error("solution file error on line {line}: {message}")]
    SolutionParse { line: usize, message: String },
}
