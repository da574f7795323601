use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("index family is not closed under subsets: {missing:#b} is missing")]
    NotSubsetClosed { missing: u64 },

    #[error("set {0:#b} is not a member of the index family")]
    NotInIndex(u64),

    #[error("materialization cap exceeded: {needed} entries > cap {cap}")]
    CapExceeded { needed: u128, cap: u128 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("decomposition does not certify the tensor: {0}")]
    CertificateMismatch(String),

    #[error("power {r} is not a multiple of the certificate power {s} and no base decomposition was supplied")]
    MissingRemainder { r: usize, s: usize },

    #[error("tensor carries no partition labels")]
    MissingLabels,

    #[error("no admissible block count r in [{lo}, {hi}]")]
    NoAdmissiblePrime { lo: String, hi: String },

    #[error("decomposition provider failed: {0}")]
    Provider(String),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
