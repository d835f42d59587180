use thiserror::Error;

/// Errors raised across the planning pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("formulation error: {0}")]
    Formulation(String),
    #[error("structural mismatch: {0}")]
    Structural(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("solver error: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;
