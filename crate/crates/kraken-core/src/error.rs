//! Error taxonomy shared across the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Structural problems: mismatched dimensions, incompatible grids.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// Invalid configuration values or missing required inputs.
    #[error("configuration error: {0}")]
    Config(String),

    /// Non-finite or otherwise unusable data entries.
    #[error("data validation error: {0}")]
    DataValidation(String),

    /// Numerical failures (eigensolver breakdown, invariant violation).
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Inputs that collapse to nothing meaningful (e.g. all-zero matrix).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// Fit design matrix cannot resolve the requested parameters.
    #[error("ill-conditioned design: {0}")]
    IllConditioned(String),

    /// Sampler failed to reach a usable operating point.
    #[error("tuning failure: {0}")]
    TuningFailure(String),

    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors caused by bad inputs/configuration rather than
    /// numerical breakdown at runtime.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch(_)
                | Error::GridMismatch(_)
                | Error::Config(_)
                | Error::DataValidation(_)
                | Error::DegenerateInput(_)
                | Error::Parse(_)
        )
    }
}
