//! Closed-form and recursive evaluation of the walk's first two moments,
//! the variance, and the diffusion coefficient on the diffusive locus.
//!
//! Every closed form is a ratio of gamma functions evaluated through
//! [`crate::special::gamma_ratio`]; each one has an exact O(t) recursion as
//! an independent second route. The recursions are also the fallback on the
//! line `2 gamma + r = 1`, where the closed-form second moment degenerates
//! to 0/0 and no closed form is claimed.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::Parameters;
use crate::special::{gamma_ratio, reciprocal_gamma};

/// Half-width of the band around the singular line `2 gamma + r = 1` inside
/// which the second moment switches to the exact recursion.
pub const SINGULAR_LINE_TOLERANCE: f64 = 1e-6;

/// Which evaluation route [`mean_square_displacement`] takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MsdBranch {
    ClosedForm,
    Recursion,
}

impl MsdBranch {
    pub fn label(self) -> &'static str {
        match self {
            MsdBranch::ClosedForm => "closed-form",
            MsdBranch::Recursion => "recursion",
        }
    }
}

/// Time-indexed mean, mean-square, and variance of the displacement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentSeries {
    pub times: Vec<u64>,
    pub mean: Vec<f64>,
    pub mean_sq: Vec<f64>,
    pub variance: Vec<f64>,
}

impl MomentSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

fn validate_times(times: &[u64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidSchedule("no record times given".into()));
    }
    if times[0] < 1 {
        return Err(Error::InvalidSchedule("record times must be >= 1".into()));
    }
    if times.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidSchedule(
            "record times must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Mean displacement at time `t`:
/// `<x_t> = (2s - 1) Gamma(t + gamma) / (Gamma(1 + gamma) Gamma(t))`.
///
/// At the `gamma = -1` endpoint (a pure reverser, `q = 1`) the gamma factor
/// in the denominator blows up; the recursion value (zero from `t = 2`
/// onward, since the second step always undoes the first) is returned
/// instead.
pub fn mean_displacement(params: Parameters, t: u64) -> f64 {
    assert!(t >= 1, "moments start at t = 1");
    let bias = params.first_step_bias();
    if t == 1 || bias == 0.0 {
        return bias;
    }
    let g = params.gamma();
    if g == -1.0 {
        return 0.0;
    }
    bias * gamma_ratio(g, t).expect("t + gamma >= 1 for t >= 2") * reciprocal_gamma(1.0 + g)
}

/// The full mean series `<x_1> .. <x_t_max>` by the exact recursion
/// `<x_{t+1}> = (1 + gamma/t) <x_t>`, seeded with `2s - 1`.
pub fn mean_displacement_recursion(params: Parameters, t_max: u64) -> Vec<f64> {
    assert!(t_max >= 1);
    let g = params.gamma();
    let mut series = Vec::with_capacity(t_max as usize);
    let mut value = params.first_step_bias();
    series.push(value);
    for t in 1..t_max {
        value *= 1.0 + g / t as f64;
        series.push(value);
    }
    series
}

/// Probability that step `t` is a move:
/// `<sigma_t^2> = Gamma(t - r) / (Gamma(1 - r) Gamma(t))`.
///
/// Equals 1 at `t = 1` (the first step never rests) and 0 for `r = 1`,
/// `t >= 2` (the walker freezes after the first step).
pub fn move_probability(params: Parameters, t: u64) -> f64 {
    assert!(t >= 1);
    if t == 1 {
        return 1.0;
    }
    let r = params.r();
    if r == 0.0 {
        return 1.0;
    }
    if r == 1.0 {
        return 0.0;
    }
    gamma_ratio(-r, t).expect("t - r >= 1 for t >= 2") * reciprocal_gamma(1.0 - r)
}

/// Expected number of moves up to time `t`:
/// `<sum_k sigma_k^2> = Gamma(t - r + 1) / (Gamma(2 - r) Gamma(t))`.
///
/// Reduces to `t` for `r = 0` and saturates at 1 for `r = 1`.
pub fn expected_move_count(params: Parameters, t: u64) -> f64 {
    assert!(t >= 1);
    let r = params.r();
    if r == 0.0 {
        return t as f64;
    }
    if r == 1.0 {
        return 1.0;
    }
    gamma_ratio(1.0 - r, t).expect("t + 1 - r >= 1") * reciprocal_gamma(2.0 - r)
}

/// Which route [`mean_square_displacement`] uses for these parameters.
pub fn msd_branch(params: Parameters) -> MsdBranch {
    let g = params.gamma();
    if g == 0.0 {
        return MsdBranch::ClosedForm;
    }
    if (2.0 * g + params.r() - 1.0).abs() <= SINGULAR_LINE_TOLERANCE {
        MsdBranch::Recursion
    } else {
        MsdBranch::ClosedForm
    }
}

/// Mean square displacement at time `t`.
///
/// For `gamma != 0` away from the singular line:
///
/// ```text
/// <x_t^2> = [Gamma(t + 2g)/Gamma(2g) - Gamma(1 + t - r)/Gamma(1 - r)]
///           / ((2g + r - 1) Gamma(t))
/// ```
///
/// For `gamma = 0` this degenerates to
/// `<x_t^2> = Gamma(1 + t - r) / (Gamma(2 - r) Gamma(t))`.
///
/// Within [`SINGULAR_LINE_TOLERANCE`] of `2 gamma + r = 1` the numerator and
/// denominator both vanish, and the value comes from the exact recursion.
pub fn mean_square_displacement(params: Parameters, t: u64) -> f64 {
    assert!(t >= 1);
    if t == 1 {
        return 1.0;
    }
    let g = params.gamma();
    let r = params.r();
    if g == 0.0 {
        return expected_move_count(params, t);
    }
    let denom = 2.0 * g + r - 1.0;
    if denom.abs() <= SINGULAR_LINE_TOLERANCE {
        return *mean_square_recursion(params, t)
            .last()
            .expect("t >= 1 yields a nonempty series");
    }
    if t == 2 && g == -1.0 {
        // q = 1: the second step always undoes the first, and the closed
        // form has Gamma(t + 2 gamma) on a pole.
        return 0.0;
    }
    let leading = gamma_ratio(2.0 * g, t).expect("t + 2 gamma > 0 off the q = 1 edge")
        * reciprocal_gamma(2.0 * g);
    let resting = gamma_ratio(1.0 - r, t).expect("t + 1 - r >= 1") * reciprocal_gamma(1.0 - r);
    (leading - resting) / denom
}

/// The full second-moment series `<x_1^2> .. <x_t_max^2>` by the exact
/// recursion
/// `<x_{t+1}^2> = (1 + 2 gamma / t) <x_t^2> + ((1 - r)/t) <sum_k sigma_k^2>`,
/// with the cumulative move count advanced multiplicatively so the sweep is
/// O(t_max) time and O(1) state.
pub fn mean_square_recursion(params: Parameters, t_max: u64) -> Vec<f64> {
    assert!(t_max >= 1);
    let g = params.gamma();
    let r = params.r();
    let mut series = Vec::with_capacity(t_max as usize);
    let mut msd = 1.0;
    let mut move_count = 1.0; // <sum sigma^2> at t = 1
    series.push(msd);
    for t in 1..t_max {
        let tf = t as f64;
        msd = (1.0 + 2.0 * g / tf) * msd + (1.0 - r) / tf * move_count;
        series.push(msd);
        move_count *= (tf + 1.0 - r) / tf;
    }
    series
}

/// Mean, mean-square, and variance at the requested times, using the
/// branch-consistent evaluators above. On the recursion branch a single
/// O(max t) sweep serves every requested time.
pub fn variance_series(params: Parameters, times: &[u64]) -> Result<MomentSeries> {
    validate_times(times)?;
    let mean: Vec<f64> = times
        .iter()
        .map(|&t| mean_displacement(params, t))
        .collect();
    let mean_sq: Vec<f64> = match msd_branch(params) {
        MsdBranch::ClosedForm => times
            .iter()
            .map(|&t| mean_square_displacement(params, t))
            .collect(),
        MsdBranch::Recursion => {
            let full = mean_square_recursion(params, *times.last().unwrap());
            times.iter().map(|&t| full[(t - 1) as usize]).collect()
        }
    };
    let variance: Vec<f64> = mean
        .iter()
        .zip(&mean_sq)
        .map(|(m, msq)| msq - m * m)
        .collect();
    Ok(MomentSeries {
        times: times.to_vec(),
        mean,
        mean_sq,
        variance,
    })
}

/// Diffusion coefficient under the convention `Var ~ 2 D t`, defined only on
/// the diffusive locus.
///
/// On the `gamma = 1/2, r > 0` segment:
/// `D = 1/(3 - 4p) - 2 (2s - 1)^2 / pi`.
/// On the `r = 0, gamma < 1/2` segment the mean grows too slowly to
/// contribute and `D = 1 / (2 (1 - 2 gamma))`.
pub fn diffusion_coefficient(params: Parameters) -> Result<f64> {
    let report = crate::regime::classify(params);
    if report.regime != crate::regime::Regime::Diffusive {
        return Err(Error::NotDiffusive(report.regime.label()));
    }
    if params.r() > 0.0 {
        let bias = params.first_step_bias();
        Ok(1.0 / (3.0 - 4.0 * params.p()) - 2.0 * bias * bias / std::f64::consts::PI)
    } else {
        Ok(0.5 / (1.0 - 2.0 * params.gamma()))
    }
}
