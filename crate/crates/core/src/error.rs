use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),
    #[error("trace is {0}, expected 1")]
    TraceNotOne(f64),
    #[error("matrix has a non-finite entry")]
    NonFinite,
    #[error("vector norm is {0}, expected 1")]
    NotNormalized(f64),
    #[error("label `{0}` already present in layout")]
    LabelCollision(String),
    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),
    #[error("label sets overlap on `{0}`")]
    LabelOverlap(String),
    #[error("keep set is empty")]
    EmptyKeepSet,
    #[error("invalid layout: {0}")]
    InvalidLayout(String),
    #[error("rank {rank} outside 1..={dim}")]
    BadRank { rank: usize, dim: usize },
    #[error("invalid instrument: {0}")]
    InvalidInstrument(String),
    #[error("instrument is incomplete (residual {0:e})")]
    IncompleteInstrument(f64),
    #[error("matrix is not unitary (residual {0:e})")]
    NotUnitary(f64),
    #[error("instrument is not a rank-1 projective measurement")]
    NotProjective,
    #[error("{outcomes} outcomes cannot form a rank-1 POVM on dimension {dim}")]
    BadOutcomeCount { outcomes: usize, dim: usize },
    #[error("identity `{name}` violated: {lhs} vs {rhs}")]
    InternalIdentityViolation { name: &'static str, lhs: f64, rhs: f64 },
    #[error("measured subsystem has dimension {0}; this measurement family needs a qubit")]
    UnsupportedDim(usize),
    #[error("expression `{0}` is not defined on this measurement family")]
    UnsupportedExpression(&'static str),
    #[error("expressions disagree by {0:e}")]
    ExpressionDisagreement(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("parse error: {0}")]
    Parse(String),
}
