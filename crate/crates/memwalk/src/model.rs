//! Walk definition: parameters, step values, trajectory sufficient
//! statistics, and the exact one-step transition law.
//!
//! The transition law depends on the full history only through the counts
//! of past `+1`, `-1`, and `0` steps, so a [`WalkState`] is a lossless
//! compression of the history and every update is O(1).

use serde::Serialize;

use crate::error::{Error, Result};

/// Absolute tolerance on probability normalization checks.
pub const PROBABILITY_TOLERANCE: f64 = 1e-12;

/// The stepping probabilities of the walk.
///
/// When the recalled past step was a move, the walker repeats it with
/// probability `p`, reverses it with probability `q`, and rests with
/// probability `r` (`p + q + r = 1`). A recalled rest is always repeated.
/// The very first step goes right with probability `s` and never rests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Parameters {
    p: f64,
    q: f64,
    r: f64,
    s: f64,
}

impl Parameters {
    /// Validates ranges and the `p + q + r = 1` constraint (within
    /// [`PROBABILITY_TOLERANCE`]). Inputs are never silently renormalized;
    /// see [`Parameters::renormalized`] for the explicit variant.
    pub fn new(p: f64, q: f64, r: f64, s: f64) -> Result<Self> {
        for (name, v) in [("p", p), ("q", q), ("r", r), ("s", s)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameters(format!(
                    "{name} = {v} is outside [0, 1]"
                )));
            }
        }
        let sum = p + q + r;
        if (sum - 1.0).abs() > PROBABILITY_TOLERANCE {
            return Err(Error::InvalidParameters(format!(
                "p + q + r = {sum} violates p + q + r = 1"
            )));
        }
        Ok(Self { p, q, r, s })
    }

    /// Rescales `(p, q, r)` by their sum before validating.
    pub fn renormalized(p: f64, q: f64, r: f64, s: f64) -> Result<Self> {
        let sum = p + q + r;
        if !sum.is_finite() || sum <= 0.0 {
            return Err(Error::InvalidParameters(format!(
                "cannot renormalize p + q + r = {sum}"
            )));
        }
        Self::new(p / sum, q / sum, r / sum, s)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// Memory asymmetry `gamma = p - q`, always in `[-1, 1]`.
    pub fn gamma(&self) -> f64 {
        self.p - self.q
    }

    /// Drift of the first step, `2s - 1`.
    pub fn first_step_bias(&self) -> f64 {
        2.0 * self.s - 1.0
    }
}

/// One step of the walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Step {
    Minus,
    Zero,
    Plus,
}

impl Step {
    pub fn value(self) -> i64 {
        match self {
            Step::Minus => -1,
            Step::Zero => 0,
            Step::Plus => 1,
        }
    }

    pub const ALL: [Step; 3] = [Step::Minus, Step::Zero, Step::Plus];
}

/// Sufficient statistics of a trajectory history.
///
/// Invariants: `n_plus + n_minus + n_zero = t`, `x = n_plus - n_minus`,
/// `n_plus + n_minus >= 1` (the first step never rests).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WalkState {
    t: u64,
    n_plus: u64,
    n_minus: u64,
    n_zero: u64,
    x: i64,
}

impl WalkState {
    /// State after the first step, which must be a move.
    pub fn first(step: Step) -> Result<Self> {
        match step {
            Step::Plus => Ok(Self {
                t: 1,
                n_plus: 1,
                n_minus: 0,
                n_zero: 0,
                x: 1,
            }),
            Step::Minus => Ok(Self {
                t: 1,
                n_plus: 0,
                n_minus: 1,
                n_zero: 0,
                x: -1,
            }),
            Step::Zero => Err(Error::InvalidState("the first step never rests".into())),
        }
    }

    /// Builds a state from step counts, validating reachability.
    pub fn from_counts(n_plus: u64, n_minus: u64, n_zero: u64) -> Result<Self> {
        let t = n_plus + n_minus + n_zero;
        if t == 0 {
            return Err(Error::InvalidState("t = 0 has no history to recall".into()));
        }
        if n_plus + n_minus == 0 {
            return Err(Error::InvalidState(
                "unreachable state: the first step is always a move".into(),
            ));
        }
        Ok(Self {
            t,
            n_plus,
            n_minus,
            n_zero,
            x: n_plus as i64 - n_minus as i64,
        })
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn n_plus(&self) -> u64 {
        self.n_plus
    }

    pub fn n_minus(&self) -> u64 {
        self.n_minus
    }

    pub fn n_zero(&self) -> u64 {
        self.n_zero
    }

    /// Lattice position, `n_plus - n_minus`.
    pub fn x(&self) -> i64 {
        self.x
    }

    /// Number of past moves, `n_plus + n_minus`.
    pub fn moves(&self) -> u64 {
        self.n_plus + self.n_minus
    }

    /// Advances the state by one step.
    pub fn apply(self, step: Step) -> Self {
        let mut next = self;
        next.t += 1;
        next.x += step.value();
        match step {
            Step::Plus => next.n_plus += 1,
            Step::Minus => next.n_minus += 1,
            Step::Zero => next.n_zero += 1,
        }
        next
    }
}

/// One-step law over `{-1, 0, +1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepDistribution {
    pub p_plus: f64,
    pub p_zero: f64,
    pub p_minus: f64,
}

impl StepDistribution {
    pub fn total(&self) -> f64 {
        self.p_plus + self.p_zero + self.p_minus
    }

    pub fn probability(&self, step: Step) -> f64 {
        match step {
            Step::Plus => self.p_plus,
            Step::Zero => self.p_zero,
            Step::Minus => self.p_minus,
        }
    }

    /// Maps a uniform variate in `[0, 1)` to a step.
    ///
    /// The partition order is fixed (`[0, p_plus)`, then `[p_plus,
    /// p_plus + p_zero)`, then the remainder) and is part of the
    /// reproducibility contract: golden trajectory tests depend on it.
    pub fn sample(&self, u: f64) -> Step {
        if u < self.p_plus {
            Step::Plus
        } else if u < self.p_plus + self.p_zero {
            Step::Zero
        } else {
            Step::Minus
        }
    }
}

/// Law of the first step: right with probability `s`, left otherwise.
pub fn first_step_distribution(params: Parameters) -> StepDistribution {
    StepDistribution {
        p_plus: params.s(),
        p_zero: 0.0,
        p_minus: 1.0 - params.s(),
    }
}

/// Law of step `t + 1` given the history counts, in the cancellation-free
/// count form:
///
/// ```text
/// P(+1) = (n_plus p + n_minus q) / t
/// P(-1) = (n_minus p + n_plus q) / t
/// P( 0) = ((n_plus + n_minus) r + n_zero) / t
/// ```
pub fn step_distribution(params: Parameters, state: WalkState) -> StepDistribution {
    let t = state.t() as f64;
    let np = state.n_plus() as f64;
    let nm = state.n_minus() as f64;
    let nz = state.n_zero() as f64;
    StepDistribution {
        p_plus: (np * params.p() + nm * params.q()) / t,
        p_zero: ((np + nm) * params.r() + nz) / t,
        p_minus: (nm * params.p() + np * params.q()) / t,
    }
}

/// Same law computed as the literal two-stage procedure: recall a uniform
/// past step, then mix the per-category next-step laws. Kept as an
/// independent cross-check route for [`step_distribution`].
pub fn step_distribution_reference(params: Parameters, state: WalkState) -> StepDistribution {
    let t = state.t() as f64;
    let w_plus = state.n_plus() as f64 / t;
    let w_minus = state.n_minus() as f64 / t;
    let w_zero = state.n_zero() as f64 / t;
    // Recalled +1 -> (p, r, q); recalled -1 -> (q, r, p); recalled 0 -> (0, 1, 0).
    StepDistribution {
        p_plus: w_plus * params.p() + w_minus * params.q(),
        p_zero: w_plus * params.r() + w_minus * params.r() + w_zero,
        p_minus: w_plus * params.q() + w_minus * params.p(),
    }
}
