use thiserror::Error;

use crate::timetree::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),

    #[error("invalid modulus {0}: must be an odd prime in [3, 2^62)")]
    InvalidModulus(u64),

    #[error("matrix is rank deficient mod q or the system has no solution")]
    NoSolutionOrRankDeficient,

    #[error("degenerate basis: column {0} is (numerically) dependent on earlier columns")]
    DegenerateBasis(usize),

    #[error("Gaussian width {width} is below the required {required}")]
    WidthTooSmall { width: f64, required: f64 },

    #[error("invalid Gaussian width {0}: must be finite and >= 1")]
    InvalidWidth(f64),

    #[error("invalid trapdoor: {0}")]
    InvalidTrapdoor(String),

    #[error("parameter error: {0}")]
    Param(String),

    #[error("time period {t} out of range for depth {ell}")]
    PeriodOutOfRange { t: u64, ell: u8 },

    #[error("node {node} is not an ancestor of {target}")]
    NotAnAncestor { node: NodeId, target: NodeId },

    #[error("secret key is past its last period")]
    LastPeriod,

    #[error("secret key is for period {key}, requested period {requested}")]
    TimeMismatch { key: u64, requested: u64 },

    #[error("secret key does not cover node {0}")]
    MissingNode(NodeId),

    #[error("protocol violation: {0}")]
    ProtocolViolation(String),

    #[error("malicious user detected: {0}")]
    AdversaryDetected(String),

    #[error("restart limit of {0} exceeded")]
    RestartLimitExceeded(u32),

    #[error("malformed encoding: {0}")]
    Format(String),

    #[error(transparent)]
    Wire(#[from] crate::protocol::DecodeError),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
