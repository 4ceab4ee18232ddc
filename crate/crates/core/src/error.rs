use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("value {value} outside of domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("problem too large: {dofs} degrees of freedom (limit {limit})")]
    Resource { dofs: usize, limit: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("linear system is singular or indefinite: {0}")]
    Singular(String),
}

pub type Result<T> = std::result::Result<T, Error>;
