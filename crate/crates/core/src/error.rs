use thiserror::Error;

/// Errors raised by the leakage analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("tabulation bound exceeded: {0}")]
    Resource(String),

    #[error("pmf is not normalized (total mass {0})")]
    Unnormalized(f64),

    #[error("singular covariance matrix (det = {0:e})")]
    Singular(f64),

    #[error("degenerate scenario: {0}")]
    Degenerate(String),

    #[error("relative loss undefined: prior entropy {0} bits is not positive")]
    IllDefinedRelativeLoss(f64),

    #[error("no spectator count up to {limit} meets relative-loss budget {budget}")]
    Unbounded { limit: u64, budget: f64 },

    #[error("enumeration needs {0:e} combinations, beyond the budget of 1e8")]
    Budget(f64),

    #[error("first-execution loss is zero; ratio undefined")]
    ZeroFirstLoss,

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
