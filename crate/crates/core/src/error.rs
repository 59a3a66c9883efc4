use thiserror::Error;

/// Errors raised by the numerical routines and the report/grid I/O layer.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A one-dimensional optimization failed to bracket or converge.
    #[error("optimization error: {0}")]
    Optimization(String),

    /// Too little signal to fit a decay rate.
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// The exponent alpha violates the supersolution admissibility condition.
    #[error("admissibility error: {0}")]
    Admissibility(String),

    /// The integrability exponent fails the divergence condition.
    #[error("condition error: {0}")]
    Condition(String),

    /// The lattice of bumps does not fit the construction.
    #[error("geometry error: {0}")]
    Geometry(String),

    /// A sampled grid violates its invariants.
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// An internal consistency check failed; indicates a bug, not bad input.
    #[error("internal assertion failed: {0}")]
    Assertion(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
