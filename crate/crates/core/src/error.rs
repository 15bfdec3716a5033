//! Error type shared by every module of the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failures raised by model construction, numerical routines and the CLI.
#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the moment-generating-function domain or another
    /// admissible range.
    #[error("domain error: {0}")]
    Domain(String),

    /// A bracketing root search could not find a sign change.
    #[error("no root: {0}")]
    NoRoot(String),

    /// Invalid simulation or model configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Threshold solvers need non-monotone paths.
    #[error("model has monotone paths: {0}")]
    MonotonePaths(String),

    /// Empirical law smaller than the configured minimum.
    #[error("simulation budget too small: {0}")]
    SimulationBudget(String),

    /// Laplace inversion failed its transform-residual check.
    #[error("Laplace inversion failed: {0}")]
    Inversion(String),

    /// The functional does not decay fast enough against the law.
    #[error("integrability error: {0}")]
    Integrability(String),

    /// Isotonic projection had to move a node beyond the noise level.
    #[error("monotonicity error: {0}")]
    Monotonicity(String),

    /// No truncation horizon satisfies the discounted-tail bound.
    #[error("horizon error: {0}")]
    Horizon(String),

    /// A documented precondition of an operation does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// Nested Monte Carlo standard error above the configured cap.
    #[error("budget error: {0}")]
    Budget(String),

    /// Fixed-point iteration did not converge.
    #[error("convergence error: {0}")]
    Convergence(String),

    /// Configuration text could not be parsed or validated.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of a numerical routine (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        self.exit_code() == 3
    }

    /// Process exit code: 2 for invalid input, 3 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NoRoot(_)
            | Error::Integrability(_)
            | Error::Horizon(_)
            | Error::Inversion(_)
            | Error::Monotonicity(_)
            | Error::Budget(_)
            | Error::Convergence(_)
            | Error::SimulationBudget(_) => 3,
            Error::Domain(_)
            | Error::Config(_)
            | Error::MonotonePaths(_)
            | Error::Precondition(_)
            | Error::Parse(_)
            | Error::Io(_) => 2,
        }
    }
}
