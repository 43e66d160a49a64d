//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("invalid walk state: {0}")]
    InvalidState(String),

    /// The gamma-ratio argument landed on (or past) a pole of the gamma
    /// function, so the ratio is not finite.
    #[error("gamma ratio is not finite: Gamma({arg}) hits a pole")]
    GammaPole { arg: f64 },

    #[error("invalid record schedule: {0}")]
    InvalidSchedule(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("accumulator record schedules do not match")]
    ScheduleMismatch,

    #[error("degenerate fit window: {0}")]
    DegenerateWindow(String),

    #[error("infeasible sweep constraint: {0}")]
    InfeasibleConstraint(String),

    /// Diffusion coefficients are only defined on the diffusive locus.
    #[error("parameters are not on the diffusive locus (classified as {0})")]
    NotDiffusive(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
