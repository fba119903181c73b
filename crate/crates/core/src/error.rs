use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A sampled function is too coarse for the requested mode content.
    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("time step {dt} violates the stability limit {limit}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("non-finite field value at step {step}")]
    NonFinite { step: usize },

    #[error("conjugate gradient did not converge in {iterations} iterations (relative residual {residual:e})")]
    CgNotConverged { iterations: usize, residual: f64 },

    /// The boundary measurement vanished for nonzero data.
    #[error("boundary trace vanishes for probe {0}")]
    ZeroTrace(String),

    #[error("degenerate time projection: template norm {0:e}")]
    DegenerateProjection(f64),

    #[error("guard band excludes every sample; mode unusable")]
    GuardEverywhere,

    #[error("measurement gap {delta:e} exceeds the small-gap regime limit {limit:e}")]
    RegimeViolation { delta: f64, limit: f64 },

    #[error("gap equals the lower damping bound; logarithmic term is singular")]
    SingularGap,

    #[error("modulation vanishes at t = 0")]
    ZeroModulation,

    #[error("decay fit: {0}")]
    DecayFit(String),

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
