use thiserror::Error;

/// Errors produced across the simulation and processing pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dipole field undefined: observer coincides with source")]
    CoincidentPoints,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("could not place {n_mines} mines with {min_separation} m separation after {attempts} attempts")]
    PlacementFailed { n_mines: usize, min_separation: f64, attempts: usize },

    #[error("scale list is empty")]
    EmptyScales,

    #[error("input contains non-finite samples")]
    NonFinite,

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("window length {window} needs at least {needed} samples, series has {available}")]
    WindowTooLarge { window: usize, needed: usize, available: usize },

    #[error("correlation undefined: a series has zero variance")]
    ZeroVariance,

    #[error("one-class SVM did not converge within {iterations} iterations")]
    SolverNotConverged { iterations: usize },

    #[error("simulation seed {seed} failed: {source}")]
    Simulation {
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("malformed CSV at line {line}: {reason}")]
    Csv { line: usize, reason: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
