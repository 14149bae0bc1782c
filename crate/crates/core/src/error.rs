//! Crate-wide error type.

use crate::circuit::GateId;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unsupported gate `{0}`")]
    UnsupportedGate(String),
    #[error("register error: {0}")]
    Register(String),
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
    #[error("unknown gate id {0}")]
    UnknownGate(GateId),
    #[error("calibration schema: {0}")]
    CalibrationSchema(String),
    #[error("error rate out of range: {0}")]
    RateRange(String),
    #[error("cx on uncoupled pair ({0}, {1})")]
    Uncoupled(usize, usize),
    #[error("calibration does not cover {0}")]
    Coverage(String),
    #[error("non-unitary gate `{0}` in commutation check")]
    NonUnitary(&'static str),
    #[error("joint support of {got} qubits exceeds limit {limit}")]
    SupportTooLarge { got: usize, limit: usize },
    #[error("gate {1} is not an immediate dependent of gate {0}")]
    NotDependent(GateId, GateId),
    #[error("circuit has {n} qubits, over the limit {limit}")]
    TooManyQubits { n: usize, limit: usize },
    #[error("width mismatch: {0}")]
    WidthMismatch(String),
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("graph schema: {0}")]
    GraphSchema(String),
    #[error("malformed ZZ block {0}: {1}")]
    MalformedBlock(usize, String),
    #[error("schedule enumeration passed the limit of {limit} (found {found} so far)")]
    ScheduleLimit { found: u64, limit: u64 },
    #[error("undefined ratio: {0}")]
    UndefinedRatio(&'static str),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
