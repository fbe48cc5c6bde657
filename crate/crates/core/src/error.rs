use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index out of range: {0}")]
    Domain(String),

    #[error("argument modulus {modulus} lies outside the q-exponential disk of radius {radius}")]
    DivergentArgument { modulus: f64, radius: f64 },

    #[error("series did not reach the requested tolerance within {terms} terms")]
    NoConvergence { terms: usize },

    #[error("|lambda| = {modulus} is not inside the coherent-state disk of radius {radius}")]
    OutsideConvergenceDisk { modulus: f64, radius: f64 },

    #[error("Gaussian-exponential sum would hold {count} terms (limit {limit})")]
    TooManyTerms { count: usize, limit: usize },

    #[error("non-finite coefficient or slope produced")]
    NonFinite,

    #[error("eigenstate index {n} exceeds the supported maximum {max}")]
    TooLargeN { n: usize, max: usize },

    #[error("Fock dimension {dim} leaves a relative tail of {tail:e}")]
    DimTooSmall { dim: usize, tail: f64 },

    #[error("state has zero norm")]
    ZeroState,

    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degenerate level data: {0}")]
    DegenerateData(String),

    #[error("invalid level data: {0}")]
    InvalidData(String),

    #[error("series expansion loses precision: largest term {peak:e} exceeds {limit:e}")]
    IllConditioned { peak: f64, limit: f64 },

    #[error(
        "quadrature did not converge: error estimate {estimate:e} after {intervals} intervals"
    )]
    QuadratureNoConvergence { estimate: f64, intervals: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
