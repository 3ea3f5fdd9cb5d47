use thiserror::Error;

/// Errors raised by the numerical kernels and the objects built on them.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid measurement: {0}")]
    InvalidPovm(String),

    #[error("parameter `{name}` = {value} is out of range ({allowed})")]
    OutOfRange {
        name: &'static str,
        value: f64,
        allowed: &'static str,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("support condition violated: {0}")]
    SupportViolation(String),

    #[error("size guard exceeded: {0}")]
    Guard(String),

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_range(name: &'static str, value: f64, lo: f64, hi: f64, allowed: &'static str) -> Result<()> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(())
    } else {
        Err(Error::OutOfRange { name, value, allowed })
    }
}
