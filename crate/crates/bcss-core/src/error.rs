//! Crate-wide error type.

use std::fmt;

/// Errors reported by the library.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the documented domain of an operation.
    Domain(String),
    /// A result (or an unavoidable intermediate) is not representable in f64.
    Overflow(String),
    /// Two sampled signals do not share the same grid (dt and length).
    GridMismatch(String),
    /// A transcribed printed formula produced a value outside [0, 1];
    /// carries the interferer symbol pattern index that produced it.
    FormulaInconsistency { xi: u64, value: f64 },
    /// Requested chirp family is not registered.
    UnknownFamily { family: String, available: Vec<String> },
    /// A scenario is internally inconsistent.
    Scenario(String),
    /// Adaptive quadrature exhausted its subdivision budget.
    Quadrature(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Overflow(msg) => write!(f, "overflow: {msg}"),
            Error::GridMismatch(msg) => write!(f, "grid mismatch: {msg}"),
            Error::FormulaInconsistency { xi, value } => write!(
                f,
                "formula inconsistency: pattern xi={xi} produced probability {value} outside [0, 1]"
            ),
            Error::UnknownFamily { family, available } => write!(
                f,
                "unknown chirp family \"{family}\"; available: {}",
                available.join(", ")
            ),
            Error::Scenario(msg) => write!(f, "invalid scenario: {msg}"),
            Error::Quadrature(msg) => write!(f, "quadrature failure: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
