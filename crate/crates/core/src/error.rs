use thiserror::Error;

/// Errors raised by the numerical operations.
///
/// Every variant names the module and operation that failed so that the CLI
/// can report it without extra context.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("{module}::{op}: invalid input: {msg}")]
    Invalid {
        module: &'static str,
        op: &'static str,
        msg: String,
    },

    #[error("{module}::{op}: quadrature did not converge (estimate {estimate:e}, tolerance {tolerance:e})")]
    Quadrature {
        module: &'static str,
        op: &'static str,
        estimate: f64,
        tolerance: f64,
    },

    #[error("{module}::{op}: root bracket failure: {msg}")]
    Bracket {
        module: &'static str,
        op: &'static str,
        msg: String,
    },

    #[error("{module}::{op}: monotonicity violated by {violation:e} ({msg})")]
    NonMonotone {
        module: &'static str,
        op: &'static str,
        violation: f64,
        msg: String,
    },

    #[error("{module}::{op}: divergence: {msg}")]
    Diverged {
        module: &'static str,
        op: &'static str,
        msg: String,
    },
}

impl Error {
    pub(crate) fn invalid(module: &'static str, op: &'static str, msg: impl Into<String>) -> Self {
        Error::Invalid {
            module,
            op,
            msg: msg.into(),
        }
    }

    /// True for input validation failures (as opposed to numerical trouble).
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Invalid { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
