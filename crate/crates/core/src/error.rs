use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("degree {degree} exceeds the cap of {cap}")]
    DegreeTooHigh { degree: usize, cap: usize },

    #[error("{n} elements exceed the pair-partition limit of {cap}")]
    TooManyElements { n: usize, cap: usize },

    #[error("matrix is not symmetric (|c_ij - c_ji| = {gap:e})")]
    NotSymmetric { gap: f64 },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eig:e})")]
    NotPsd { min_eig: f64 },

    #[error("dimension must be at least 1")]
    ZeroDimension,

    #[error("arity mismatch: outer polynomial has {expected} variables, {got} inner functionals supplied")]
    ArityMismatch { expected: usize, got: usize },

    #[error("functional is constant; its gradient vanishes identically")]
    ConstantFunctional,

    #[error("Gaussian measure is degenerate (kernel of dimension {kernel_dim})")]
    DegenerateMeasure { kernel_dim: usize },

    #[error("vector is not in the Cameron-Martin space")]
    NotInCameronMartin,

    #[error("process is not adapted: cell {cell} depends on coordinate {coord}")]
    NotAdapted { cell: usize, coord: usize },

    #[error("all {0} samples were rejected")]
    AllSamplesRejected(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown identity `{0}`")]
    UnknownIdentity(String),

    #[error("identity {identity} does not accept these inputs: {reason}")]
    IdentityShape { identity: &'static str, reason: String },

    #[error("value is not finite")]
    NonFinite,

    #[error("time {0} is not aligned with the grid")]
    NotGridAligned(f64),

    #[error("malformed document: {0}")]
    Format(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
