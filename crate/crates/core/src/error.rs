use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A quadrature or root search stopped before reaching its tolerance.
    #[error("accuracy target {target:.3e} not met: achieved error bound {achieved:.3e} ({context})")]
    Accuracy {
        target: f64,
        achieved: f64,
        context: String,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn accuracy(target: f64, achieved: f64, context: impl Into<String>) -> Self {
        Error::Accuracy {
            target,
            achieved,
            context: context.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
