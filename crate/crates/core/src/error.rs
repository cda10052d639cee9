use alloc::string::String;

/// Errors raised by matrix construction, functional calculus, maps and checks.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("input is not Hermitian: asymmetry {asymmetry:e} exceeds {tolerance:e}")]
    ExcessAsymmetry { asymmetry: f64, tolerance: f64 },
    #[error("Hermitian eigensolver did not converge")]
    EigensolverFailure,
    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{x} is outside the domain (0, inf)")]
    DomainViolation { x: f64 },
    #[error("invalid function declaration: {0}")]
    InvalidFunction(String),
    #[error("class violation: {0}")]
    ClassViolation(String),
    #[error("map is not strictly positive (min eigenvalue of map(I) is {margin:e})")]
    NotStrictlyPositive { margin: f64 },
    #[error("input to a direct-sum map has nonzero off-diagonal blocks ({magnitude:e})")]
    NotBlockDiagonal { magnitude: f64 },
    #[error("unknown mean `{0}`")]
    UnknownMean(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("self-check `{what}` failed: discrepancy {discrepancy:e} exceeds {tolerance:e}")]
    SelfCheck {
        what: &'static str,
        discrepancy: f64,
        tolerance: f64,
    },
}

pub type Result<T> = core::result::Result<T, Error>;
