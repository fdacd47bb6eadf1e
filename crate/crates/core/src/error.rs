use std::fmt;

/// Errors surfaced by the exact solvers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Text that should denote a rational number (or a matrix of them)
    /// could not be parsed.
    Parse(String),
    /// An input parameter lies outside its admissible range.
    InvalidParameter(String),
    /// The supplied vectors do not span a full-rank lattice.
    LinearDependence,
    /// No reduced basis vector carries a nonzero denominator block.
    NoNonzeroQPart,
    /// A brute-force search would exceed the enumeration guard.
    Intractable(String),
    /// An exact internal consistency check failed; indicates a bug.
    Internal(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::LinearDependence => write!(f, "basis vectors are linearly dependent"),
            Error::NoNonzeroQPart => {
                write!(f, "no basis vector has a nonzero denominator block")
            }
            Error::Intractable(msg) => write!(f, "intractable: {msg}"),
            Error::Internal(msg) => write!(f, "internal check failed: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
