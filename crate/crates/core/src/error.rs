use num_complex::Complex64;
use thiserror::Error;

/// Why a point failed to lie in the C-resolvent set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ResolventFailure {
    /// `R(C)` is not contained in `R(λ - A)`.
    Inconsistent,
    /// `N(λ - A)` is nontrivial.
    NonUnique,
}

impl std::fmt::Display for ResolventFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ResolventFailure::Inconsistent => write!(f, "range of C not covered"),
            ResolventFailure::NonUnique => write!(f, "kernel nontrivial"),
        }
    }
}

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("lambda = {lambda} not in C-resolvent set: {reason}")]
    NotInResolventSet {
        lambda: Complex64,
        reason: ResolventFailure,
    },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("tolerance not met: achieved {achieved:e}, requested {requested:e}")]
    ToleranceNotMet { achieved: f64, requested: f64 },
    #[error("exponent outside route domain: {0}")]
    RouteDomain(String),
    #[error("time {z} outside admissible sector of half-angle {half_angle}")]
    OutOfSector { z: Complex64, half_angle: f64 },
    #[error("no tail bound supplied")]
    TailBoundMissing,
    #[error("unknown identity: {0}")]
    UnknownIdentity(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
