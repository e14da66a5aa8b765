use thiserror::Error;

/// Errors raised by the measurement, dynamics and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter `{name}` = {value} is outside its domain ({expected})")]
    ParameterDomain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("state is the zero vector")]
    ZeroState,

    #[error("state is not normalized (norm² = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },

    #[error("outcome has zero probability on this state; the post-measurement vector vanishes")]
    DegenerateOutcome,

    #[error("outcome probability {0} is outside [0, 1]")]
    ProbabilityOutOfRange(f64),

    #[error("best guess is undefined for Δp = 0")]
    UndefinedEstimator,

    #[error("N₊ = {n_plus} is outside [0, N = {n}]")]
    CountOutOfRange { n: u32, n_plus: u32 },

    #[error("series length N = {n} is outside [1, {max}]")]
    SeriesLength { n: u32, max: u32 },

    #[error("invalid configuration field `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    #[error("at least {min} samples are required, got {got}")]
    TooFewSamples { min: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
