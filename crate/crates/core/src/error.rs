use alloc::string::String;
use core::fmt;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A matrix does not have the shape its role requires.
    DimensionMismatch {
        field: &'static str,
        expected: (usize, usize),
        found: (usize, usize),
    },
    /// A NaN or infinite entry at `(row, col)` of `field`.
    NonFinite {
        field: &'static str,
        row: usize,
        col: usize,
    },
    /// A scalar parameter outside its admissible range.
    InvalidParameter { name: &'static str, reason: String },
    /// The SVD iteration did not converge.
    SvdFailed { rows: usize, cols: usize },
    /// A linear system that must be positive definite could not be factored.
    SingularSystem,
    /// The objective or an iterate became NaN or infinite.
    Diverged { iteration: usize },
    /// The backtracking step parameter grew past its ceiling.
    StepOverflow { gamma: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { field, expected, found } => write!(
                f,
                "dimension mismatch in `{field}`: expected {}x{}, found {}x{}",
                expected.0, expected.1, found.0, found.1
            ),
            Error::NonFinite { field, row, col } => {
                write!(f, "non-finite entry in `{field}` at ({row},{col})")
            }
            Error::InvalidParameter { name, reason } => {
                write!(f, "invalid parameter `{name}`: {reason}")
            }
            Error::SvdFailed { rows, cols } => {
                write!(f, "SVD of a {rows}x{cols} matrix did not converge")
            }
            Error::SingularSystem => f.write_str("linear system is not positive definite"),
            Error::Diverged { iteration } => {
                write!(f, "non-finite objective at iteration {iteration}")
            }
            Error::StepOverflow { gamma } => {
                write!(f, "line search step parameter overflowed (gamma = {gamma:e})")
            }
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
