use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A caller combined options that the operation does not support.
    #[error("usage error: {0}")]
    Usage(String),

    /// A density description was rejected (not log-concave, bad parameters, ...).
    #[error("invalid density: {0}")]
    InvalidDensity(String),

    /// Adaptive quadrature ran out of subdivisions before meeting its tolerance.
    #[error(
        "quadrature did not converge: estimate {estimate:e} with error {error:e} after {subdivisions} subdivisions"
    )]
    NonConvergence {
        estimate: f64,
        error: f64,
        subdivisions: usize,
    },

    /// A search produced a tightness ratio above one by more than the tolerance.
    #[error("counterexample for {claim}: tightness {ratio} exceeds 1 + {tol}")]
    Counterexample {
        claim: String,
        ratio: f64,
        tol: f64,
        witness: Box<serde_json::Value>,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidDensity(msg.into())
    }
}
