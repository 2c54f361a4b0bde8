use thiserror::Error;

/// Errors raised by the estimation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of a function.
    #[error("domain error in {function}: {reason}")]
    Domain {
        function: &'static str,
        reason: String,
    },

    /// A moment of the requested order does not exist for the parameters.
    #[error("moment undefined: {0}")]
    MomentUndefined(String),

    /// A state-space model violates one of its invariants.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// A satellite coincides with the linearization point.
    #[error("degenerate geometry: satellite {satellite} is at zero range")]
    DegenerateGeometry { satellite: usize },

    /// Too few measurements to observe the state.
    #[error("unobservable: {0}")]
    Observability(String),

    /// A linear solve or factorization failed.
    #[error("numerical failure in {context}{}", iteration.map(|i| format!(" at VB iteration {i}")).unwrap_or_default())]
    Numerical {
        context: &'static str,
        iteration: Option<usize>,
    },

    /// Every particle weight underflowed.
    #[error("particle filter degeneracy: all weights vanished")]
    Degeneracy,

    /// A Monte Carlo replication failed.
    #[error("replication {index} (stream key {seed:#018x}) failed: {source}")]
    Replication {
        index: usize,
        seed: u64,
        source: Box<Error>,
    },

    /// Experiment configuration or input data is invalid.
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(function: &'static str, reason: impl Into<String>) -> Error {
    Error::Domain {
        function,
        reason: reason.into(),
    }
}
