//! Exact forward evolution of the full position distribution for small
//! times, used as ground truth for both the analytic moments and the Monte
//! Carlo engine.
//!
//! The transition law depends on the history only through the counts
//! `(n_plus, n_minus)` (with `n_zero` implied), so the distribution at each
//! level lives on a triangular lattice of count pairs and the push-forward
//! is exact up to floating-point roundoff. State space is O(t^2) per level
//! and the full evolution costs O(t^3).

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{first_step_distribution, step_distribution, Parameters, WalkState};

/// Default refusal ceiling for [`evolve`]; levels beyond this are costly
/// (O(t^3) work, O(t^2) state per level) and better served by Monte Carlo.
pub const DEFAULT_T_CEILING: u64 = 512;

/// Exact probability mass over count pairs `(n_plus, n_minus)` at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactDistribution {
    t: u64,
    /// Dense triangular storage over `n_plus + n_minus <= t`, row-major in
    /// `n_plus`.
    mass: Vec<f64>,
}

impl ExactDistribution {
    fn zeros(t: u64) -> Self {
        let n = (t + 1) * (t + 2) / 2;
        Self {
            t,
            mass: vec![0.0; n as usize],
        }
    }

    fn index(&self, n_plus: u64, n_minus: u64) -> usize {
        debug_assert!(n_plus + n_minus <= self.t);
        // Rows of decreasing length: row n_plus starts after
        // sum_{i < n_plus} (t + 1 - i) entries.
        let np = n_plus;
        let start = np * (self.t + 1) - np * np.saturating_sub(1) / 2;
        (start + n_minus) as usize
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    /// Mass on the count pair `(n_plus, n_minus)`; `n_zero` is implied as
    /// `t - n_plus - n_minus`.
    pub fn mass(&self, n_plus: u64, n_minus: u64) -> f64 {
        self.mass[self.index(n_plus, n_minus)]
    }

    /// All `(n_plus, n_minus, mass)` entries with nonzero mass.
    pub fn support(&self) -> impl Iterator<Item = (u64, u64, f64)> + '_ {
        (0..=self.t).flat_map(move |np| {
            (0..=self.t - np).filter_map(move |nm| {
                let m = self.mass(np, nm);
                (m != 0.0).then_some((np, nm, m))
            })
        })
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// Marginalizes the count pairs onto the lattice position
    /// `x = n_plus - n_minus`.
    pub fn position_distribution(&self) -> BTreeMap<i64, f64> {
        let mut out = BTreeMap::new();
        for (np, nm, m) in self.support() {
            *out.entry(np as i64 - nm as i64).or_insert(0.0) += m;
        }
        out
    }

    /// `(sum x P(x), sum x^2 P(x))` over the exact distribution.
    pub fn moments(&self) -> (f64, f64) {
        let mut mean = 0.0;
        let mut mean_sq = 0.0;
        for (np, nm, m) in self.support() {
            let x = np as f64 - nm as f64;
            mean += x * m;
            mean_sq += x * x * m;
        }
        (mean, mean_sq)
    }
}

/// Evolves the exact distribution forward to `t_max`, returning one level
/// per time `1..=t_max`. Refuses `t_max` above [`DEFAULT_T_CEILING`].
pub fn evolve(params: Parameters, t_max: u64) -> Result<Vec<ExactDistribution>> {
    evolve_with_ceiling(params, t_max, DEFAULT_T_CEILING)
}

/// [`evolve`] with an explicit resource ceiling.
pub fn evolve_with_ceiling(
    params: Parameters,
    t_max: u64,
    ceiling: u64,
) -> Result<Vec<ExactDistribution>> {
    if t_max < 1 {
        return Err(Error::InvalidParameters("t_max must be >= 1".into()));
    }
    if t_max > ceiling {
        return Err(Error::ResourceLimit(format!(
            "exact evolution to t = {t_max} exceeds the ceiling {ceiling}"
        )));
    }

    let mut levels = Vec::with_capacity(t_max as usize);
    let mut level = ExactDistribution::zeros(1);
    let first = first_step_distribution(params);
    let i10 = level.index(1, 0);
    let i01 = level.index(0, 1);
    level.mass[i10] = first.p_plus;
    level.mass[i01] = first.p_minus;
    levels.push(level);

    for t in 1..t_max {
        let current = levels.last().unwrap();
        let mut next = ExactDistribution::zeros(t + 1);
        for (np, nm, m) in current.support() {
            let state = WalkState::from_counts(np, nm, t - np - nm)
                .expect("support only holds reachable states");
            let dist = step_distribution(params, state);
            if dist.p_plus != 0.0 {
                let i = next.index(np + 1, nm);
                next.mass[i] += m * dist.p_plus;
            }
            if dist.p_zero != 0.0 {
                let i = next.index(np, nm);
                next.mass[i] += m * dist.p_zero;
            }
            if dist.p_minus != 0.0 {
                let i = next.index(np, nm + 1);
                next.mass[i] += m * dist.p_minus;
            }
        }
        levels.push(next);
    }
    Ok(levels)
}
