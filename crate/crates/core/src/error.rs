use core::fmt;

/// Errors raised by the discretization, the nonlinearity catalog and the
/// exponent bookkeeping. Solver failures live in [`crate::solver::SolveError`].
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Grid parameters outside the supported range.
    InvalidGrid(&'static str),
    /// Two fields (or a field and a sampled modulation) live on different grids.
    GridMismatch,
    /// A value array does not have the length the grid requires.
    ShapeMismatch { expected: usize, found: usize },
    /// A coefficient or sample is NaN or infinite.
    NonFinite,
    /// The polyharmonic order must be at least one.
    InvalidOrder(u32),
    /// L^p exponent below one (or NaN).
    InvalidExponent(f64),
    /// A nonlinearity parameter outside its documented range.
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    /// A hypothesis or exponent formula divides by `N - 2m` (or similar) and
    /// is undefined for the requested nominal dimension and order.
    FormulaUndefined {
        what: &'static str,
        n: u32,
        m: u32,
    },
    /// Hypothesis identifier not recognised.
    UnknownHypothesis,
    /// Exponent inputs of the bootstrap iteration violate its preconditions.
    Precondition(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidGrid(msg) => write!(f, "invalid grid: {msg}"),
            Error::GridMismatch => f.write_str("fields live on different grids"),
            Error::ShapeMismatch { expected, found } => {
                write!(f, "expected {expected} values, found {found}")
            }
            Error::NonFinite => f.write_str("non-finite coefficient or sample"),
            Error::InvalidOrder(m) => write!(f, "polyharmonic order must be >= 1, got {m}"),
            Error::InvalidExponent(p) => write!(f, "L^p exponent must be >= 1, got {p}"),
            Error::InvalidParameter {
                name,
                value,
                reason,
            } => write!(f, "parameter `{name}` = {value} out of range: {reason}"),
            Error::FormulaUndefined { what, n, m } => {
                write!(f, "{what} is undefined for N = {n}, m = {m}")
            }
            Error::UnknownHypothesis => f.write_str("unknown hypothesis identifier"),
            Error::Precondition(msg) => write!(f, "precondition failed: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
