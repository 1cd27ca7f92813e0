use thiserror::Error;

/// Failure modes shared by every module of the crate.
///
/// The variants are grouped so that a front end can map them onto exit
/// codes: argument problems (`Domain`, `Contract`) versus numerical trouble
/// (`Overflow`, `Precision`, `Integration`, `Conservation`, `Runaway`).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error in {context}: {message}")]
    Domain {
        context: &'static str,
        message: String,
    },

    #[error("overflow in {context}: {message}")]
    Overflow {
        context: &'static str,
        message: String,
    },

    #[error("precision error in {context}: {message}")]
    Precision {
        context: &'static str,
        message: String,
    },

    #[error("contract violation in {context}: {message}")]
    Contract {
        context: &'static str,
        message: String,
    },

    #[error("integration failed at tau = {tau_reached}: {message}")]
    Integration { tau_reached: f64, message: String },

    #[error("conservation error: mass defect {defect:e} at tau = {tau} exceeds {limit:e}")]
    Conservation { tau: f64, defect: f64, limit: f64 },

    #[error("runaway simulation: {message}")]
    Runaway { message: String },
}

impl Error {
    pub(crate) fn domain(context: &'static str, message: impl Into<String>) -> Self {
        Error::Domain {
            context,
            message: message.into(),
        }
    }

    pub(crate) fn overflow(context: &'static str, message: impl Into<String>) -> Self {
        Error::Overflow {
            context,
            message: message.into(),
        }
    }

    pub(crate) fn precision(context: &'static str, message: impl Into<String>) -> Self {
        Error::Precision {
            context,
            message: message.into(),
        }
    }

    pub(crate) fn contract(context: &'static str, message: impl Into<String>) -> Self {
        Error::Contract {
            context,
            message: message.into(),
        }
    }

    /// True for errors caused by bad input rather than numerical limits.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Domain { .. } | Error::Contract { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
