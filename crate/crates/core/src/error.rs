use alloc::string::String;

/// Errors raised by the core operations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("arity {0} is outside the supported range 1..=16")]
    ArityOutOfRange(usize),
    #[error("truth table has length {found}, expected {expected}")]
    TableLength { expected: usize, found: usize },
    #[error("monomial index {index} is outside 1..={arity}")]
    MonomialIndex { index: usize, arity: usize },
    #[error("unknown instance `{0}`")]
    UnknownInstance(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("{what} count {found} exceeds the cap of {cap}")]
    Cap {
        what: &'static str,
        found: usize,
        cap: usize,
    },
    #[error("distribution does not sum to 1 (sum = {0})")]
    NotNormalized(String),
    #[error("negative probability weight at input {0}")]
    NegativeWeight(String),
    #[error("beta = {0} is outside [-1, 1]")]
    BetaOutOfRange(f64),
    #[error("visibility {0} is outside [0, 1]")]
    Visibility(f64),
    #[error("matrix for qubit {0} is not unitary")]
    NotUnitary(usize),
    #[error("non-finite angle")]
    NonFiniteAngle,
    #[error("ideal quantum value {quantum} does not exceed the classical bound {classical}")]
    NoViolation { quantum: f64, classical: f64 },
    #[error("standard error must be positive, got {0}")]
    NonPositiveStdErr(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
