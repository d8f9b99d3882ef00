//! Error type shared across the estimation pipeline.

use thiserror::Error;

/// Errors raised by dataset construction, estimation, and simulation.
#[derive(Debug, Error)]
pub enum Error {
    /// Covariates of different shape were combined, or a metric was applied
    /// to a covariate variant it does not measure.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    /// No sample point lies within distance `h` of the evaluation point.
    #[error("empty neighborhood: no sample point within distance {h} of the evaluation point")]
    EmptyNeighborhood { h: f64 },

    /// A quantile level outside its admissible open interval.
    #[error("invalid level: {alpha} is outside the open interval (0, {max})")]
    InvalidLevel { alpha: f64, max: f64 },

    /// The tail functional is undefined at the given argument.
    #[error("degenerate functional value: {message}")]
    DegeneratePhi { message: String },

    /// The level grid makes the estimator's denominator vanish.
    #[error("degenerate level grid: {message}")]
    DegenerateGrid { message: String },

    /// Extrapolation must move toward more extreme levels (beta <= alpha).
    #[error("invalid extrapolation: target level {beta} exceeds anchor level {alpha}")]
    InvalidExtrapolation { alpha: f64, beta: f64 },

    /// The anchor quantile for extrapolation must be positive and finite.
    #[error("invalid anchor: anchor quantile {anchor} must be positive and finite")]
    InvalidAnchor { anchor: f64 },

    /// Too many Monte Carlo replicates failed for the summary to be meaningful.
    #[error(
        "unstable configuration: {failures} of {replicates} replicates failed (more than 10%)"
    )]
    UnstableConfiguration { failures: usize, replicates: usize },

    /// A functional name not present in the registry.
    #[error("unknown functional '{name}'; known: {known}")]
    UnknownFunctional { name: String, known: String },

    /// A constructor or operation precondition was violated.
    #[error("invalid input: {message}")]
    InvalidInput { message: String },

    /// A malformed record in an input file.
    #[error("csv line {line}: {message}")]
    Ingest { line: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid_input(message: impl Into<String>) -> Self {
        Error::InvalidInput { message: message.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
