//! Seeded, reproducible Monte Carlo ensembles with streaming moment
//! statistics.
//!
//! # Reproducibility contract
//!
//! Results are a pure function of `(Parameters, EnsembleConfig)` and never
//! of the worker count. The pieces that pin this down, and that golden tests
//! freeze, are:
//!
//! - Trajectory `i` draws from a `ChaCha8` stream with the 32-byte key
//!   derived from `master_seed` by four successive `splitmix64` outputs
//!   (little-endian) and the stream id set to `i`.
//! - Each step consumes exactly one `u64`, mapped to `[0, 1)` by taking the
//!   top 53 bits ([`unit_from_bits`]), and the unit interval is partitioned
//!   in the fixed order `[0, p_plus)`, `[p_plus, p_plus + p_zero)`,
//!   remainder.
//! - Trajectories are accumulated in blocks of [`TRAJECTORY_BLOCK`] in
//!   ascending index order, and block accumulators are merged in ascending
//!   block order, so the floating-point reduction is deterministic whether
//!   blocks run on one thread or many.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::Serialize;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{first_step_distribution, step_distribution, Parameters, WalkState};
use crate::moments::MomentSeries;

/// Trajectories per accumulation block. Fixed (not tied to the worker
/// count) so the reduction tree is identical at any parallelism degree.
pub const TRAJECTORY_BLOCK: u64 = 1024;

/// Default resolution of the geometric record schedule.
pub const DEFAULT_POINTS_PER_DECADE: u32 = 20;

/// Default ceiling on `n_trajectories * record_times.len()`.
pub const DEFAULT_CELL_BUDGET: u64 = 1_000_000_000;

/// Log-spaced record times: `round(10^(k / points_per_decade))` for
/// ascending `k`, deduplicated, clipped to `[1, t_max]`, with `t_max`
/// always included.
pub fn geometric_schedule(t_max: u64, points_per_decade: u32) -> Vec<u64> {
    assert!(t_max >= 1 && points_per_decade >= 1);
    let mut times = Vec::new();
    for k in 0.. {
        let t = 10f64.powf(k as f64 / points_per_decade as f64).round() as u64;
        if t > t_max {
            break;
        }
        if times.last() != Some(&t) {
            times.push(t);
        }
    }
    if times.last() != Some(&t_max) {
        times.push(t_max);
    }
    times
}

/// Ensemble shape: seed, size, horizon, and record schedule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleConfig {
    pub master_seed: u64,
    pub n_trajectories: u64,
    pub t_max: u64,
    /// Strictly increasing, within `[1, t_max]`.
    pub record_times: Vec<u64>,
    /// Refusal threshold on `n_trajectories * record_times.len()`.
    pub cell_budget: u64,
}

impl EnsembleConfig {
    /// Config with the default geometric schedule (~20 points per decade).
    pub fn new(master_seed: u64, n_trajectories: u64, t_max: u64) -> Result<Self> {
        Self::with_record_times(
            master_seed,
            n_trajectories,
            t_max,
            geometric_schedule(t_max, DEFAULT_POINTS_PER_DECADE),
        )
    }

    pub fn with_record_times(
        master_seed: u64,
        n_trajectories: u64,
        t_max: u64,
        record_times: Vec<u64>,
    ) -> Result<Self> {
        let config = Self {
            master_seed,
            n_trajectories,
            t_max,
            record_times,
            cell_budget: DEFAULT_CELL_BUDGET,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trajectories < 1 {
            return Err(Error::InvalidSchedule(
                "need at least one trajectory".into(),
            ));
        }
        if self.t_max < 1 {
            return Err(Error::InvalidSchedule("t_max must be >= 1".into()));
        }
        if self.record_times.is_empty() {
            return Err(Error::InvalidSchedule("no record times".into()));
        }
        if self.record_times[0] < 1 || *self.record_times.last().unwrap() > self.t_max {
            return Err(Error::InvalidSchedule(
                "record times must lie within [1, t_max]".into(),
            ));
        }
        if self.record_times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSchedule(
                "record times must be strictly increasing".into(),
            ));
        }
        let cells = self
            .n_trajectories
            .saturating_mul(self.record_times.len() as u64);
        if cells > self.cell_budget {
            return Err(Error::ResourceLimit(format!(
                "{} trajectory-record cells exceed the budget {}",
                cells, self.cell_budget
            )));
        }
        Ok(())
    }
}

/// Single-pass running statistics for one recorded time: count, mean, and
/// central moment sums M2..M4 (Welford/Pebay update and merge).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct RunningStats {
    n: u64,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl RunningStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        let n0 = self.n as f64;
        self.n += 1;
        let n = self.n as f64;
        let delta = x - self.mean;
        let delta_n = delta / n;
        let delta_n2 = delta_n * delta_n;
        let term = delta * delta_n * n0;
        self.mean += delta_n;
        self.m4 += term * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * self.m2
            - 4.0 * delta_n * self.m3;
        self.m3 += term * delta_n * (n - 2.0) - 3.0 * delta_n * self.m2;
        self.m2 += term;
    }

    /// Exact-in-count, numerically stable pairwise merge.
    pub fn merge(a: Self, b: Self) -> Self {
        if a.n == 0 {
            return b;
        }
        if b.n == 0 {
            return a;
        }
        let na = a.n as f64;
        let nb = b.n as f64;
        let n = na + nb;
        let delta = b.mean - a.mean;
        let delta2 = delta * delta;
        let mean = a.mean + delta * nb / n;
        let m2 = a.m2 + b.m2 + delta2 * na * nb / n;
        let m3 = a.m3
            + b.m3
            + delta2 * delta * na * nb * (na - nb) / (n * n)
            + 3.0 * delta * (na * b.m2 - nb * a.m2) / n;
        let m4 = a.m4
            + b.m4
            + delta2 * delta2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
            + 6.0 * delta2 * (na * na * b.m2 + nb * nb * a.m2) / (n * n)
            + 4.0 * delta * (na * b.m3 - nb * a.m3) / n;
        Self {
            n: a.n + b.n,
            mean,
            m2,
            m3,
            m4,
        }
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Mean of squares, `mean^2 + M2/n`.
    pub fn mean_sq(&self) -> f64 {
        self.mean * self.mean
            + if self.n > 0 {
                self.m2 / self.n as f64
            } else {
                0.0
            }
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    /// Standard error of the mean.
    pub fn mean_se(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }

    /// Standard error of the sample variance,
    /// `sqrt((m4 - m2^2) / n)` with central moments `m_k = M_k / n`.
    pub fn variance_se(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let m2 = self.m2 / n;
        let m4 = self.m4 / n;
        ((m4 - m2 * m2).max(0.0) / n).sqrt()
    }
}

/// Streaming moment statistics for every recorded time of one ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentAccumulator {
    record_times: Vec<u64>,
    cells: Vec<RunningStats>,
}

impl MomentAccumulator {
    pub fn new(record_times: &[u64]) -> Self {
        Self {
            record_times: record_times.to_vec(),
            cells: vec![RunningStats::new(); record_times.len()],
        }
    }

    pub fn record_times(&self) -> &[u64] {
        &self.record_times
    }

    pub fn cells(&self) -> &[RunningStats] {
        &self.cells
    }

    pub fn count(&self) -> u64 {
        self.cells.first().map_or(0, |c| c.count())
    }

    /// Feeds one trajectory's positions, in record-time order.
    pub fn push_trajectory(&mut self, positions: &[i64]) {
        assert_eq!(
            positions.len(),
            self.cells.len(),
            "schedule length mismatch"
        );
        for (cell, &x) in self.cells.iter_mut().zip(positions) {
            cell.push(x as f64);
        }
    }

    /// Merges two accumulators over the same schedule; merging is exact in
    /// counts and stable in moments, so sharded runs reproduce sequential
    /// ones.
    pub fn merge(a: &Self, b: &Self) -> Result<Self> {
        if a.record_times != b.record_times {
            return Err(Error::ScheduleMismatch);
        }
        Ok(Self {
            record_times: a.record_times.clone(),
            cells: a
                .cells
                .iter()
                .zip(&b.cells)
                .map(|(&x, &y)| RunningStats::merge(x, y))
                .collect(),
        })
    }
}

/// Moment estimates with provenance; everything needed to regenerate it.
#[derive(Debug, Clone, Serialize)]
pub struct SimulationResult {
    pub params: Parameters,
    pub config: EnsembleConfig,
    pub code_version: String,
    pub series: MomentSeries,
    /// Standard error of the mean, per recorded time.
    pub mean_se: Vec<f64>,
    /// Standard error of the variance, per recorded time.
    pub var_se: Vec<f64>,
}

/// Maps the top 53 bits of a raw draw to `[0, 1)`. Part of the
/// reproducibility contract.
#[inline]
pub fn unit_from_bits(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The generator for trajectory `trajectory` under `master_seed`; see the
/// module docs for the exact derivation.
pub fn trajectory_rng(master_seed: u64, trajectory: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut state = master_seed;
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(trajectory);
    rng
}

/// Simulates a single trajectory, returning its position at each record
/// time. One uniform draw per step; O(1) work and state per step.
pub fn simulate_trajectory(
    params: Parameters,
    t_max: u64,
    record_times: &[u64],
    rng: &mut impl RngCore,
) -> Vec<i64> {
    let mut positions = Vec::with_capacity(record_times.len());
    let mut next_record = record_times.iter().copied().peekable();

    let first = first_step_distribution(params).sample(unit_from_bits(rng.next_u64()));
    let mut state = WalkState::first(first).expect("the first step is a move");
    while next_record.peek() == Some(&state.t()) {
        positions.push(state.x());
        next_record.next();
    }

    for _ in 1..t_max {
        let dist = step_distribution(params, state);
        state = state.apply(dist.sample(unit_from_bits(rng.next_u64())));
        while next_record.peek() == Some(&state.t()) {
            positions.push(state.x());
            next_record.next();
        }
    }
    positions
}

fn accumulate_block(
    params: Parameters,
    config: &EnsembleConfig,
    range: (u64, u64),
) -> MomentAccumulator {
    let mut acc = MomentAccumulator::new(&config.record_times);
    for trajectory in range.0..range.1 {
        let mut rng = trajectory_rng(config.master_seed, trajectory);
        let positions = simulate_trajectory(params, config.t_max, &config.record_times, &mut rng);
        acc.push_trajectory(&positions);
    }
    acc
}

fn block_ranges(n_trajectories: u64) -> Vec<(u64, u64)> {
    (0..n_trajectories)
        .step_by(TRAJECTORY_BLOCK as usize)
        .map(|start| (start, (start + TRAJECTORY_BLOCK).min(n_trajectories)))
        .collect()
}

fn finalize(
    params: Parameters,
    config: &EnsembleConfig,
    acc: MomentAccumulator,
) -> SimulationResult {
    let cells = acc.cells();
    SimulationResult {
        params,
        config: config.clone(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        series: MomentSeries {
            times: config.record_times.clone(),
            mean: cells.iter().map(RunningStats::mean).collect(),
            mean_sq: cells.iter().map(RunningStats::mean_sq).collect(),
            variance: cells.iter().map(RunningStats::variance).collect(),
        },
        mean_se: cells.iter().map(RunningStats::mean_se).collect(),
        var_se: cells.iter().map(RunningStats::variance_se).collect(),
    }
}

fn reduce_blocks(
    params: Parameters,
    config: &EnsembleConfig,
    blocks: Vec<MomentAccumulator>,
) -> SimulationResult {
    let mut total = MomentAccumulator::new(&config.record_times);
    for block in blocks {
        total = MomentAccumulator::merge(&total, &block).expect("blocks share one schedule");
    }
    finalize(params, config, total)
}

/// Runs the ensemble, one block of trajectories per work item, merging
/// block results in ascending index order.
///
/// With the `parallel` feature enabled (the default) blocks run on the
/// current rayon thread pool; without it this is [`run_ensemble_sequential`].
/// Both produce bit-identical results.
#[cfg(feature = "parallel")]
pub fn run_ensemble(params: Parameters, config: &EnsembleConfig) -> Result<SimulationResult> {
    config.validate()?;
    let blocks: Vec<MomentAccumulator> = block_ranges(config.n_trajectories)
        .into_par_iter()
        .map(|range| accumulate_block(params, config, range))
        .collect();
    Ok(reduce_blocks(params, config, blocks))
}

/// See the parallel variant; this build has the `parallel` feature disabled.
#[cfg(not(feature = "parallel"))]
pub fn run_ensemble(params: Parameters, config: &EnsembleConfig) -> Result<SimulationResult> {
    run_ensemble_sequential(params, config)
}

/// Single-threaded reference path with the identical block structure and
/// merge order as the parallel path.
pub fn run_ensemble_sequential(
    params: Parameters,
    config: &EnsembleConfig,
) -> Result<SimulationResult> {
    config.validate()?;
    let blocks: Vec<MomentAccumulator> = block_ranges(config.n_trajectories)
        .into_iter()
        .map(|range| accumulate_block(params, config, range))
        .collect();
    Ok(reduce_blocks(params, config, blocks))
}
