//! Crate-wide error type.

use std::fmt;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Malformed or out-of-contract input (non-finite entries, shape
    /// mismatches, missing fields, indices out of range).
    InvalidInput(String),
    /// The target matrix cannot be realized through the given map.
    Infeasible(String),
    /// The map representation does not satisfy the regularity the
    /// requested operation needs.
    UnsupportedRepresentation(String),
    /// The truncated map is singular where an inverse is required.
    SingularMap(String),
    /// An iterative kernel failed to converge.
    ConvergenceFailure(String),
    /// A transmitted bit could not be recovered from the observed output.
    DecodeFailure(String),
    /// The partition admits no deterministic bit-exchange tree.
    TreeConstruction(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::Infeasible(msg) => write!(f, "infeasible: {msg}"),
            Error::UnsupportedRepresentation(msg) => {
                write!(f, "unsupported representation: {msg}")
            }
            Error::SingularMap(msg) => write!(f, "singular map: {msg}"),
            Error::ConvergenceFailure(msg) => write!(f, "convergence failure: {msg}"),
            Error::DecodeFailure(msg) => write!(f, "decode failure: {msg}"),
            Error::TreeConstruction(msg) => write!(f, "tree construction: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
