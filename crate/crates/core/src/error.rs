use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter lies outside the domain of a special function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A documented precondition of an operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("zero denominator: lower Pochhammer symbol vanishes at partition {partition}")]
    ZeroDenominator { partition: String },

    /// The series argument lies outside the disc of convergence.
    #[error("series diverges: spectral radius {radius} is not below 1")]
    Divergent { radius: f64 },

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("empty sample")]
    EmptySample,

    /// A random matrix could not be factorized; the draw may be repeated.
    #[error("factorization failed: {0}")]
    Factorization(String),
}

impl Error {
    /// True for failures of numerical iteration as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Divergent { .. } | Error::NonConvergence(_) | Error::Factorization(_)
        )
    }
}
