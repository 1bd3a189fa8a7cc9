use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("cyclic substitution: G{index} replaced by an expression containing G{offending}")]
    CyclicSubstitution { index: u32, offending: u32 },

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("contour ray at angle {angle} rad does not lie in a decaying sector")]
    DivergentContour { angle: f64 },

    #[error("quadrature failed to converge: {0}")]
    Quadrature(String),

    #[error("no sign change bracketed: {0}")]
    Bracketing(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
