use thiserror::Error;

use crate::fixedpoint::QFormat;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid fixed-point format: {0}")]
    InvalidFormat(String),

    #[error("format mismatch: {lhs} vs {rhs}")]
    FormatMismatch { lhs: QFormat, rhs: QFormat },

    #[error("shift amount {shift} out of range for {word_bits}-bit word")]
    ShiftOutOfRange { shift: u32, word_bits: u32 },

    #[error("invalid configuration: {0}")]
    Config(String),

    /// Argument outside the convergence or definition domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("chain has no joints")]
    EmptyChain,

    #[error("table size {0} must be a power of two and at least 2")]
    TableSize(usize),

    #[error("register file too small: program needs {needed} registers, file has {available}")]
    Capacity { needed: usize, available: usize },

    #[error("invalid program: {0}")]
    Program(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
