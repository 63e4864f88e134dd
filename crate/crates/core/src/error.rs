use thiserror::Error;

/// Errors raised by the spectral laboratory.
///
/// Parameter-type failures (bad domain, dimension, plan) are separated from
/// numerical failures so front ends can map them to distinct exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("rejected input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("singular resolvent: lambda = {lambda} is within {gap:e} of the spectrum")]
    SingularResolvent { lambda: f64, gap: f64 },

    #[error("subcritical spike: {0}")]
    Subcritical(String),

    #[error("net certification failed: {0}")]
    Certification(String),

    #[error("plan error: {0}")]
    Plan(String),

    #[error("eigensolver did not converge after {0} iterations")]
    NoConvergence(usize),
}

impl Error {
    /// True for errors caused by caller-supplied parameters rather than by a
    /// numerical or internal failure.
    pub fn is_parameter_error(&self) -> bool {
        !matches!(self, Error::NoConvergence(_) | Error::Certification(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
