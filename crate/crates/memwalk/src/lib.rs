//! A one-dimensional random walk whose next step copies, reverses, or rests
//! relative to a uniformly recalled past step: simulated, solved, and
//! classified.
//!
//! The crate has five layers:
//!
//! - [`model`]: parameters, trajectory sufficient statistics, and the exact
//!   one-step transition law.
//! - [`moments`]: closed forms and exact recursions for the mean, mean
//!   square displacement, variance, and the diffusion coefficient.
//! - [`exact`]: exact small-time evolution of the full position
//!   distribution, the ground truth the other layers are checked against.
//! - [`mc`]: seeded, reproducible, data-parallel Monte Carlo ensembles with
//!   streaming mergeable statistics (rayon by default; build with
//!   `--no-default-features` for the sequential fallback).
//! - [`regime`]: the phase diagram: regime classification, sweeps along
//!   constraint lines, and growth-exponent fits.

pub mod error;
pub mod exact;
pub mod mc;
pub mod model;
pub mod moments;
pub mod regime;
pub mod special;

pub use error::{Error, Result};
pub use model::{Parameters, Step, StepDistribution, WalkState};
