use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {dim}: {reason}")]
    InvalidDimension { dim: usize, reason: &'static str },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("operator is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("extremal eigenvalue is degenerate (gap {gap:e})")]
    DegenerateExtremum { gap: f64 },

    #[error("threshold {threshold} is not below the kinematic bound {bound}")]
    ThresholdAboveBound { threshold: f64, bound: f64 },

    #[error("signal is constant over a period: stationary state (fixed point)")]
    StationarySignal,

    #[error("state is not at a free-evolution extremum (slope {slope:e})")]
    NotAtExtremum { slope: f64 },

    #[error("kick schedule is not sorted at index {index}")]
    UnsortedKicks { index: usize },

    #[error("invalid kick: {0}")]
    InvalidKick(String),

    #[error("sampling step must be positive, got {0}")]
    InvalidStep(f64),

    #[error("envelope needs at least 3 samples, got {0}")]
    TooFewSamples(usize),

    #[error("pulse outside the sudden regime: epsilon = {epsilon} >= {limit}")]
    NotSudden { epsilon: f64, limit: f64 },

    #[error("invalid pulse: {0}")]
    InvalidPulse(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("matrices in a span must share one shape")]
    ShapeMismatch,

    #[error("numerical rank unstable under tolerance perturbation ({low} vs {high})")]
    UnstableRank { low: usize, high: usize },

    #[error("estimate undefined: denominator {denominator:e}")]
    EstimateUndefined { denominator: f64 },

    #[error("invalid value for `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("malformed config: {0}")]
    Parse(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(key: &str, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.to_string(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by user input (config files, output paths).
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config { .. } | Error::Parse(_) | Error::Io { .. } | Error::Csv(_)
        )
    }
}
