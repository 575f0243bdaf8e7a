use thiserror::Error;

/// Errors produced by the core algorithms.
#[derive(Debug, Error)]
pub enum CoreError {
    /// Structural problems with band or divisor input.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// Evaluation requested outside the domain of a function.
    #[error("domain error: {0}")]
    Domain(String),
    /// A numerical procedure failed to converge or lost accuracy.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// Data extracted from a Herglotz function is mutually inconsistent.
    #[error("inconsistent data: {0}")]
    Inconsistent(String),
    /// Operation applied to a set of the wrong topological type.
    #[error("case mismatch: {0}")]
    CaseMismatch(String),
    /// A normal-form construction did not verify within tolerance.
    #[error("normal form failure: {0}")]
    NormalForm(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
