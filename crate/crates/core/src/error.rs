use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{op}: shape {left:?} incompatible with {right:?}")]
    DimensionMismatch { op: &'static str, left: (usize, usize), right: (usize, usize) },
    #[error("{op}: ambient rank {left} differs from {right}")]
    AmbientMismatch { op: &'static str, left: usize, right: usize },
    #[error("sublattice is not contained in the ambient lattice")]
    NotContained,
    #[error("ring elements over different primes ({0} vs {1})")]
    PrimeMismatch(usize, usize),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("exact division failed: {0}")]
    InexactDivision(String),
    #[error("module is infinite")]
    InfiniteModule,
    #[error("invalid module: {0}")]
    InvalidModule(String),
    #[error("element is not in the module's ambient space: {0}")]
    BadElement(String),
    #[error("lattice is not non-cyclotomic")]
    NotNonCyclotomic,
    #[error("invariant basis search exhausted: {0}")]
    SearchExhausted(String),
    #[error("invalid invariant basis: {0}")]
    InvalidBasis(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("invalid graph input: {0}")]
    InvalidGraphInput(String),
    #[error("automorphism violation: {0}")]
    AutomorphismViolation(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("internal invariant breached: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
