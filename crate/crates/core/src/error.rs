use thiserror::Error;

use crate::descriptor::Role;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used by front-ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    /// Malformed input data, wiring or file format problems.
    Data,
    /// A numeric precondition was violated.
    Numeric,
}

/// Errors raised while decoding descriptor or pair files.
#[derive(Debug, Error)]
pub enum FormatError {
    #[error("bad magic bytes {0:?}, expected \"ISCD\"")]
    BadMagic([u8; 4]),
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u16),
    #[error("truncated file: {0}")]
    Truncated(&'static str),
    #[error("invalid role byte {0}")]
    InvalidRole(u8),
    #[error("nonzero reserved header bytes")]
    Reserved,
    #[error("id #{0} is not valid UTF-8")]
    InvalidUtf8(u64),
    #[error("{0} trailing bytes after payload")]
    TrailingBytes(u64),
    #[error("id of {0} bytes does not fit a u16 length prefix")]
    IdTooLong(usize),
    #[error("dimension {0} does not fit the header")]
    DimOverflow(usize),
    #[error("csv line {line}: {msg}")]
    Csv { line: u64, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("zero vector{}", fmt_id(.0))]
    ZeroVector(Option<String>),
    #[error("non-finite component{}", fmt_id(.0))]
    NonFinite(Option<String>),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("descriptor dimension {dim} exceeds the maximum of {max}")]
    DimTooLarge { dim: usize, max: usize },
    #[error("duplicate id {0:?}")]
    DuplicateId(String),
    #[error("role mismatch: expected {expected}, found {found}")]
    RoleMismatch { expected: Role, found: Role },
    #[error("id mismatch at scale {scale}, position {position}: {expected:?} vs {found:?}")]
    IdMismatch {
        scale: usize,
        position: usize,
        expected: String,
        found: String,
    },
    #[error("unknown id {0:?}")]
    UnknownId(String),
    #[error("empty {0}")]
    Empty(&'static str),
    #[error("vector for {id:?} is not unit-norm (norm {norm})")]
    NotUnitNorm { id: String, norm: f64 },
    #[error("training set has {have} vectors, need at least n = {need}")]
    InsufficientTraining { have: usize, need: usize },
    #[error("distance matrix of {entries} entries exceeds the guard of {limit}")]
    SizeGuard { entries: u128, limit: u128 },
    #[error("duplicate candidate pair ({0:?}, {1:?})")]
    DuplicateCandidate(String, String),
    #[error("query {0:?} appears more than once in the ground truth")]
    DuplicateTruthQuery(String),
    #[error("negative activation {value} in channel {channel}")]
    NegativeActivation { channel: usize, value: f64 },
    #[error("class {label} has {count} samples, need at least 2")]
    ClassTooSmall { label: u64, count: usize },
    #[error("batch contains a single class")]
    SingleClass,
    #[error("target probabilities sum to {0}, expected 1")]
    NotNormalized(f64),
    #[error("epoch {epoch} outside [0, {total})")]
    EpochOutOfRange { epoch: f64, total: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
}

fn fmt_id(id: &Option<String>) -> String {
    match id {
        Some(id) => format!(" for id {id:?}"),
        None => String::new(),
    }
}

impl Error {
    pub fn category(&self) -> Category {
        match self {
            Error::Format(_)
            | Error::DimMismatch { .. }
            | Error::DimTooLarge { .. }
            | Error::DuplicateId(_)
            | Error::RoleMismatch { .. }
            | Error::IdMismatch { .. }
            | Error::UnknownId(_)
            | Error::Empty(_)
            | Error::DuplicateCandidate(..)
            | Error::DuplicateTruthQuery(_)
            | Error::SizeGuard { .. } => Category::Data,
            _ => Category::Numeric,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Format(FormatError::Io(e))
    }
}
