use thiserror::Error;

/// Errors raised by the solver, diagnostics and harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid dimension {0}: expected 1, 2 or 3")]
    InvalidDimension(usize),

    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A periodic Poisson-type inversion was handed a source with nonzero mean.
    #[error("compatibility error: mean {mean:.3e} exceeds tolerance {tol:.3e} ({context})")]
    Compatibility {
        mean: f64,
        tol: f64,
        context: &'static str,
    },

    #[error("density floor breached: min density {min:.6} < floor {floor}")]
    DensityFloor { min: f64, floor: f64 },

    #[error("unstable state: {0}")]
    UnstableState(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("log-domain error: value {value} at eps = {eps} is not positive")]
    LogDomain { eps: f64, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("solver failed at t = {time:.6}: {source}")]
    AtTime {
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("case eps = {eps} failed: {source}")]
    Case {
        eps: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn at_time(self, time: f64) -> Self {
        match self {
            e @ Error::AtTime { .. } => e,
            e => Error::AtTime {
                time,
                source: Box::new(e),
            },
        }
    }

    /// Innermost error, skipping time/case annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtTime { source, .. } | Error::Case { source, .. } => source.root(),
            e => e,
        }
    }
}
