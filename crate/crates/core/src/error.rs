use thiserror::Error;

/// Errors raised by the library.
///
/// Variants split into two families: invalid input (bad descriptors,
/// out-of-domain arguments) and numerical failure (a root that could not
/// be bracketed, an iteration cap). [`Error::is_validation`] tells them apart.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid norm descriptor: {0}")]
    InvalidNorm(String),

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("degenerate basis: |det| = {0:e}")]
    DegenerateBasis(f64),

    #[error("lattice is not unimodular: covolume = {0}")]
    NotUnimodular(f64),

    #[error("argument out of domain: {0}")]
    OutOfDomain(String),

    #[error("invalid approximation function: {0}")]
    InvalidPsi(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("root not bracketed: {0}")]
    RootNotBracketed(String),

    #[error("iteration cap exceeded: {0}")]
    IterationCap(String),

    #[error("integer overflow: {0}")]
    Overflow(String),

    #[error("numerical failure: {0}")]
    Numeric(String),
}

impl Error {
    /// True for errors caused by bad input rather than a numerical breakdown.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::InvalidNorm(_)
                | Error::Unsupported(_)
                | Error::DegenerateBasis(_)
                | Error::NotUnimodular(_)
                | Error::OutOfDomain(_)
                | Error::InvalidPsi(_)
                | Error::Hypothesis(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
