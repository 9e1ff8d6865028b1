use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("Bloch vector norm {norm} exceeds 1 by more than {tolerance:e}")]
    OutsideBlochBall { norm: f64, tolerance: f64 },

    #[error("measurement precision must be positive, got {0}")]
    NonPositiveDelta(f64),

    #[error("operator has zero trace; estimate undefined")]
    ZeroTrace,

    #[error("not a density matrix: {0}")]
    InvalidDensity(String),

    #[error("step too coarse: Bloch norm {norm} after update (dt = {dt:e})")]
    StepTooCoarse { norm: f64, dt: f64 },

    #[error("negative eigenvalue {eigenvalue:e} after density step (dt = {dt:e})")]
    NegativeEigenvalue { eigenvalue: f64, dt: f64 },

    #[error("propagator normalization drifted by {drift:e} in one step (limit {limit:e})")]
    NormalizationDrift { drift: f64, limit: f64 },

    #[error("non-finite value produced: {0}")]
    NonFinite(String),

    #[error("trajectory {index}: {source}")]
    Trajectory {
        index: u64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for failures of the numerical schemes, as opposed to bad inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::StepTooCoarse { .. }
            | Error::NegativeEigenvalue { .. }
            | Error::NormalizationDrift { .. }
            | Error::NonFinite(_)
            | Error::ZeroTrace => true,
            Error::Trajectory { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
