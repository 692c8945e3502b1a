use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient data: arm {arm} has {n} observations, at least {required} required")]
    InsufficientData {
        arm: &'static str,
        n: usize,
        required: usize,
    },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("no solution: {0}")]
    NoSolution(String),

    /// A computation produced a non-finite or underflowing value.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A prior probability is too small for a ratio to be meaningful.
    #[error("unstable: {0}")]
    Unstable(String),

    #[error("estimation error: {0}")]
    Estimation(String),

    #[error("internal consistency violated: {0}")]
    Consistency(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
