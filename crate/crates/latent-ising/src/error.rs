use alloc::string::String;

/// Every failure the library can report. Variant names double as the
/// stable error codes surfaced by the command-line tool.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("malformed tree: {0}")]
    MalformedTree(String),
    #[error("unknown leaf {0}")]
    UnknownLeaf(usize),
    #[error("unknown node {0}")]
    UnknownNode(usize),
    #[error("invalid leaf pair ({0}, {1})")]
    UnknownPair(usize, usize),
    #[error("invalid cut: {0}")]
    InvalidCut(String),
    #[error("need at least 2 leaves, got {0}")]
    TooFewLeaves(usize),
    #[error("leaf subset has odd size {0}")]
    OddSubset(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{n} leaves exceeds the exact-evaluation limit of {max}")]
    TooLarge { n: usize, max: usize },
    #[error("sample matrix has no rows")]
    EmptySample,
    #[error("bad spin value {value} at row {row}, column {col}")]
    BadSpinValue { row: usize, col: usize, value: i64 },
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("no consistent model: {0}")]
    NoConsistentModel(String),
    #[error("nodes {0} and {1} already form a cherry")]
    AlreadyCherry(usize, usize),
    #[error("leaf sets differ")]
    LeafSetMismatch,
}

impl Error {
    /// Variant name without payload, e.g. `"TooLarge"`.
    pub fn code(&self) -> &'static str {
        match self {
            Error::MalformedTree(_) => "MalformedTree",
            Error::UnknownLeaf(_) => "UnknownLeaf",
            Error::UnknownNode(_) => "UnknownNode",
            Error::UnknownPair(..) => "UnknownPair",
            Error::InvalidCut(_) => "InvalidCut",
            Error::TooFewLeaves(_) => "TooFewLeaves",
            Error::OddSubset(_) => "OddSubset",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::TooLarge { .. } => "TooLarge",
            Error::EmptySample => "EmptySample",
            Error::BadSpinValue { .. } => "BadSpinValue",
            Error::BadParameter(_) => "BadParameter",
            Error::NoConsistentModel(_) => "NoConsistentModel",
            Error::AlreadyCherry(..) => "AlreadyCherry",
            Error::LeafSetMismatch => "LeafSetMismatch",
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
