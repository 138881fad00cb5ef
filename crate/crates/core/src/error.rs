use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = HdError> = std::result::Result<T, E>;

/// Broad failure category, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Io,
    Infeasible,
}

#[derive(Debug, Error)]
pub enum HdError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("code out of range at row {row}, col {col}: {value} does not fit in {bits} bits")]
    CodeOutOfRange {
        row: usize,
        col: usize,
        value: u64,
        bits: u32,
    },

    #[error("data length mismatch: shape needs {expected} codes, got {actual} (first bad position row {row}, col {col})")]
    LengthMismatch {
        expected: usize,
        actual: usize,
        row: usize,
        col: usize,
    },

    #[error("bit width {0} outside [1, 16]")]
    BitWidth(u32),

    #[error("invalid dimension: {0}")]
    Dimension(String),

    #[error("not a permutation of 0..{len}: {reason}")]
    InvalidPermutation { len: usize, reason: String },

    #[error("invalid plan: {0}")]
    InvalidPlan(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("NHD is undefined for a single-row matrix")]
    UndefinedNhd,

    #[error("exact search supports at most {max} channels, got {channels}")]
    TooManyChannels { channels: usize, max: usize },

    #[error("infeasible configuration: {0}")]
    Infeasible(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("partial sum {value} overflows the {bits}-bit signed accumulator")]
    PsumOverflow { value: i128, bits: u32 },
}

impl HdError {
    pub fn class(&self) -> ErrorClass {
        match self {
            HdError::Io { .. } => ErrorClass::Io,
            HdError::TooManyChannels { .. }
            | HdError::Infeasible(_)
            | HdError::PsumOverflow { .. } => ErrorClass::Infeasible,
            _ => ErrorClass::Validation,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HdError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(err: serde_json::Error) -> Self {
        HdError::Parse {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}
