//! Crate-wide error type.

use std::fmt;

/// Errors raised by grid construction, assembly, factorization and the
/// experiment runner.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Invalid grid parameters (odd m, n too small, index overflow, ...).
    Grid(String),
    /// A region not resolved by the coarse partition, or bad coefficients.
    Coefficient(String),
    /// Dimension mismatch between operands.
    Dimension(String),
    /// A matrix expected to be SPD produced a non-positive pivot.
    Indefinite { pivot_index: usize, pivot: f64 },
    /// An interface dof is not covered by any vertex set (set-construction bug).
    UncoveredDof(usize),
    /// Invalid experiment configuration.
    Config(String),
    /// IO failure while reading or writing artifacts.
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Grid(msg) => write!(f, "grid error: {msg}"),
            Error::Coefficient(msg) => write!(f, "coefficient error: {msg}"),
            Error::Dimension(msg) => write!(f, "dimension mismatch: {msg}"),
            Error::Indefinite { pivot_index, pivot } => write!(
                f,
                "matrix is not positive definite: pivot {pivot:e} at index {pivot_index}"
            ),
            Error::UncoveredDof(d) => {
                write!(f, "interface dof {d} is not covered by any vertex set")
            }
            Error::Config(msg) => write!(f, "config error: {msg}"),
            Error::Io(msg) => write!(f, "io error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
