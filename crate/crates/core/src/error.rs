use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("graph must have at least one vertex")]
    EmptyGraph,
    #[error("vertex {0} out of range")]
    VertexOutOfRange(usize),
    #[error("loop edge at vertex {0}")]
    LoopEdge(usize),
    #[error("edge multiplicity must be positive")]
    ZeroMultiplicity,
    #[error("graph is disconnected")]
    Disconnected,
    #[error("no edge between {0} and {1}")]
    UnknownEdge(usize, usize),
    #[error("subdivision parts must be at least 1")]
    ZeroParts,
    #[error("marked points must be distinct")]
    SameMarks,
    #[error("divisor has {got} entries, graph has {expected} vertices")]
    DivisorSize { expected: usize, got: usize },
    #[error("resource cap exceeded: {what} needs {needed}, cap is {cap}")]
    CapExceeded {
        what: &'static str,
        needed: u128,
        cap: u128,
    },
    #[error("marked points are linearly equivalent (torsion order 1)")]
    MarksEquivalent,
    #[error("genus must be {expected}, got {got}")]
    WrongGenus { expected: i64, got: i64 },
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("k = 1 is not a valid period for simple reflections")]
    PeriodOne,
    #[error("incompatible permutation representations: {0}")]
    Incompatible(String),
    #[error("permutation is not in the extended affine symmetric group of period {0}")]
    NotInGroup(i64),
    #[error("window too small to certify the min-plus minimizer at ({a}, {b})")]
    WindowTooSmall { a: i64, b: i64 },
    #[error("windows do not overlap")]
    WindowMismatch,
    #[error("divisor has rank -1; no vanishing sequence")]
    NegativeRank,
    #[error("divisor is not submodular")]
    NotSubmodular,
    #[error("invalid chain spec: {0}")]
    InvalidChain(String),
    #[error("consistency check failed: {0}")]
    Inconsistent(String),
    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
