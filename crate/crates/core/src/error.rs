use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("probabilities are not a probability vector: {0}")]
    NonStochastic(String),
    #[error("all maps share one fixed point; the attractor is a single point")]
    DegenerateAttractor,
    #[error("contraction factor {value} of map {index} is outside (0, 1)")]
    ContractionOutOfRange { index: usize, value: String },
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("degree {degree} exceeds the supported maximum {max} for this backend")]
    DegreeTooLarge { degree: usize, max: usize },
    #[error("eigenvalue gap {gap:e} is below the back-substitution guard")]
    NearDegenerateSpectrum { gap: f64 },
    #[error("support of the measure is not an interval")]
    NotAnInterval,
    #[error("linear system is ill-conditioned (condition estimate {estimate:e}); use the exact backend")]
    IllConditioned { estimate: f64 },
    #[error("model is not a symmetric Bernoulli convolution on [-1, 1]")]
    NotSymmetricBernoulli,
    #[error("partition cell {index} has zero length")]
    EmptyCell { index: usize },
    #[error("jitter amplitude {amplitude} must be below half the cell width {half_width}")]
    JitterTooLarge { amplitude: f64, half_width: f64 },
    #[error("QR iteration did not converge after {sweeps} sweeps")]
    QrNotConverged { sweeps: usize },
    #[error("iteration did not converge after {iterations} steps (last step {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// True for failures of a numerical procedure, as opposed to invalid input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NearDegenerateSpectrum { .. }
                | Error::IllConditioned { .. }
                | Error::QrNotConverged { .. }
                | Error::NotConverged { .. }
        )
    }
}
