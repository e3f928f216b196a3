use thiserror::Error;

use crate::class::ClassLabel;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("unknown function name `{0}`")]
    UnknownName(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("non-positive value {value} at x = {x}")]
    PositivityViolation { x: f64, value: f64 },
    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),
    #[error("class mismatch: expected {expected}, found {found}")]
    ClassMismatch { expected: String, found: ClassLabel },
    #[error("convergence probe undecided at r = {r}")]
    UndecidedConvergence { r: f64 },
    #[error("representation denominator vanishes near x = {x}")]
    SingularDenominator { x: f64 },
    #[error("tail integral diverges for r = {r}")]
    DivergentTail { r: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("operation expects {expected} operands, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("function `{0}` is not differentiable on the probe range")]
    NonDifferentiable(String),
    #[error("finite right endpoint {0}")]
    Endpoint(f64),
    #[error("quantile error: {0}")]
    Quantile(String),
}

pub type Result<T> = std::result::Result<T, Error>;
