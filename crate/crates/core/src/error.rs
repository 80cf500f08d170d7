use thiserror::Error;

/// Errors raised by sequence generation, transforms, and the cubature engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("requested {requested} dimensions but only {available} are available")]
    Capacity { requested: usize, available: usize },

    #[error("point index range {start}..{end} exceeds the capacity 2^{bits}")]
    IndexOverflow { start: u64, end: u64, bits: u32 },

    #[error("transform length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("integrand returned a non-finite value at point {index} (output {output})")]
    NonFiniteValue { index: u64, output: usize },

    #[error("ledger level {level} is below the minimum level {minimum}")]
    LevelTooLow { level: u32, minimum: u32 },

    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),

    #[error("invalid cone parameters: {0}")]
    InvalidCone(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
