//! Asymptotic variance regimes: classification over the parameter simplex,
//! sweeps along constraint lines, and growth-exponent fits.
//!
//! The long-time variance grows as `t^e` with `e = max(2 gamma, 1 - r)` for
//! `gamma > 0` and `e = 1 - r` otherwise, with special loci: the diffusive
//! segments (`gamma = 1/2, r > 0` and `r = 0, gamma < 1/2`), the marginal
//! point `gamma = 1/2, r = 0` where the variance grows as `t ln t`, and the
//! frozen edge `r = 1`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::Parameters;
use crate::moments::MomentSeries;

/// Tolerance for the exact boundary comparisons on `gamma` and `r`.
/// Callers wanting "near-boundary" semantics should classify perturbed
/// parameters instead.
pub const BOUNDARY_TOLERANCE: f64 = 1e-12;

/// Long-time variance regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// `Var ~ t^{1-r}`, driven by the accumulating rests.
    SubdiffusiveRest,
    /// `Var ~ t^{2 gamma}` with `gamma < 1/2`, driven by the memory pull.
    SubdiffusiveMemory,
    /// On `2 gamma = 1 - r` the two subdiffusive mechanisms balance; the
    /// power is their common value and any logarithmic factor is unresolved.
    BoundarySubdiffusive,
    /// `Var ~ t`.
    Diffusive,
    /// `Var ~ t ln t` at `gamma = 1/2, r = 0`.
    MarginalSuperdiffusive,
    /// `Var ~ t^{2 gamma}` with `gamma > 1/2`.
    Superdiffusive,
    /// `r = 1`: the walker never moves again after the first step.
    Frozen,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::SubdiffusiveRest => "subdiffusive-rest",
            Regime::SubdiffusiveMemory => "subdiffusive-memory",
            Regime::BoundarySubdiffusive => "boundary-subdiffusive",
            Regime::Diffusive => "diffusive",
            Regime::MarginalSuperdiffusive => "marginal-superdiffusive",
            Regime::Superdiffusive => "superdiffusive",
            Regime::Frozen => "frozen",
        }
    }

    pub fn is_subdiffusive(self) -> bool {
        matches!(
            self,
            Regime::SubdiffusiveRest | Regime::SubdiffusiveMemory | Regime::BoundarySubdiffusive
        )
    }
}

/// Whether the power law carries a logarithmic factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LogCorrection {
    Absent,
    Present,
    /// On the subdiffusive balance line the correction is not established.
    Unknown,
}

impl LogCorrection {
    pub fn label(self) -> &'static str {
        match self {
            LogCorrection::Absent => "none",
            LogCorrection::Present => "log",
            LogCorrection::Unknown => "unknown",
        }
    }
}

/// Classification of one parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeReport {
    pub regime: Regime,
    /// Predicted variance growth exponent.
    pub exponent: f64,
    pub log_correction: LogCorrection,
}

/// Maps parameters to their asymptotic variance regime.
pub fn classify(params: Parameters) -> RegimeReport {
    let g = params.gamma();
    let r = params.r();
    let near = |a: f64, b: f64| (a - b).abs() <= BOUNDARY_TOLERANCE;

    if near(r, 1.0) {
        // Bounded variance; exponent 1 - r = 0.
        return RegimeReport {
            regime: Regime::Frozen,
            exponent: 0.0,
            log_correction: LogCorrection::Absent,
        };
    }
    if g > 0.5 + BOUNDARY_TOLERANCE {
        return RegimeReport {
            regime: Regime::Superdiffusive,
            exponent: 2.0 * g,
            log_correction: LogCorrection::Absent,
        };
    }
    if near(g, 0.5) {
        return if near(r, 0.0) {
            RegimeReport {
                regime: Regime::MarginalSuperdiffusive,
                exponent: 1.0,
                log_correction: LogCorrection::Present,
            }
        } else {
            RegimeReport {
                regime: Regime::Diffusive,
                exponent: 1.0,
                log_correction: LogCorrection::Absent,
            }
        };
    }
    // From here gamma < 1/2.
    if near(r, 0.0) {
        return RegimeReport {
            regime: Regime::Diffusive,
            exponent: 1.0,
            log_correction: LogCorrection::Absent,
        };
    }
    if g <= BOUNDARY_TOLERANCE {
        return RegimeReport {
            regime: Regime::SubdiffusiveRest,
            exponent: 1.0 - r,
            log_correction: LogCorrection::Absent,
        };
    }
    // 0 < gamma < 1/2, 0 < r < 1: the two mechanisms compete.
    let memory = 2.0 * g;
    let rest = 1.0 - r;
    if near(memory, rest) {
        RegimeReport {
            regime: Regime::BoundarySubdiffusive,
            exponent: memory,
            log_correction: LogCorrection::Unknown,
        }
    } else if memory > rest {
        RegimeReport {
            regime: Regime::SubdiffusiveMemory,
            exponent: memory,
            log_correction: LogCorrection::Absent,
        }
    } else {
        RegimeReport {
            regime: Regime::SubdiffusiveRest,
            exponent: rest,
            log_correction: LogCorrection::Absent,
        }
    }
}

/// A line through the simplex along which to sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SweepConstraint {
    /// Fix `p`; the coordinate is `q`, swept upward over `(0, 1 - p)`.
    FixedP(f64),
    /// Fix `r`; the coordinate is `gamma`, swept over `(-(1-r), 1-r)`.
    FixedR(f64),
    /// Fix `gamma`; the coordinate is `r`, swept over `(0, 1 - |gamma|)`.
    FixedGamma(f64),
}

impl SweepConstraint {
    fn range(self) -> Result<(f64, f64)> {
        match self {
            SweepConstraint::FixedP(p) => {
                if !(0.0..1.0).contains(&p) {
                    return Err(Error::InfeasibleConstraint(format!(
                        "fixed p = {p} leaves no room for q and r"
                    )));
                }
                Ok((0.0, 1.0 - p))
            }
            SweepConstraint::FixedR(r) => {
                if !(0.0..1.0).contains(&r) {
                    return Err(Error::InfeasibleConstraint(format!(
                        "fixed r = {r} leaves no room for p and q"
                    )));
                }
                Ok((-(1.0 - r), 1.0 - r))
            }
            SweepConstraint::FixedGamma(g) => {
                if !(-1.0..=1.0).contains(&g) || g.abs() >= 1.0 {
                    return Err(Error::InfeasibleConstraint(format!(
                        "fixed gamma = {g} is not an interior line"
                    )));
                }
                Ok((0.0, 1.0 - g.abs()))
            }
        }
    }

    /// Parameters at a coordinate value (with a symmetric first step; the
    /// regime does not depend on `s`).
    fn params_at(self, coord: f64) -> Result<Parameters> {
        match self {
            SweepConstraint::FixedP(p) => {
                let q = coord;
                Parameters::new(p, q, 1.0 - p - q, 0.5)
            }
            SweepConstraint::FixedR(r) => {
                let g = coord;
                let moves = 1.0 - r;
                Parameters::new((moves + g) / 2.0, (moves - g) / 2.0, r, 0.5)
            }
            SweepConstraint::FixedGamma(g) => {
                let r = coord;
                let moves = 1.0 - r;
                Parameters::new((moves + g) / 2.0, (moves - g) / 2.0, r, 0.5)
            }
        }
    }

    /// Coordinates of the regime boundaries crossed by this line, i.e. the
    /// loci `gamma = 1/2`, `gamma = 0`, `2 gamma = 1 - r`. The `r = 0` and
    /// `r = 1` edges only occur at line endpoints, which the sweep excludes.
    fn critical_coords(self) -> Vec<f64> {
        match self {
            SweepConstraint::FixedP(p) => vec![p - 0.5, p, p / 3.0],
            SweepConstraint::FixedR(r) => vec![0.0, 0.5, (1.0 - r) / 2.0],
            SweepConstraint::FixedGamma(g) => vec![1.0 - 2.0 * g],
        }
    }
}

/// One classified point along a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    /// Position along the line (meaning depends on the constraint).
    pub coordinate: f64,
    pub params: Parameters,
    pub report: RegimeReport,
}

/// A maximal run of consecutive sweep points sharing one regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeInterval {
    pub regime: Regime,
    pub coord_lo: f64,
    pub coord_hi: f64,
    /// True when the regime holds only at an isolated boundary point.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub constraint: SweepConstraint,
    pub points: Vec<SweepPoint>,
    pub intervals: Vec<RegimeInterval>,
}

/// Classifies `n_points` evenly spaced interior points along the constraint
/// line, plus every regime boundary the line crosses (so isolated loci such
/// as the diffusive point on a fixed-`p` line are never missed), and
/// collapses adjacent equal regimes into intervals.
///
/// Points are ordered by increasing coordinate. Endpoints of the line are
/// excluded: they belong to the simplex edges (`r = 0`, `q = 0`, ...), which
/// are different loci from the open line being swept.
pub fn sweep_line(constraint: SweepConstraint, n_points: usize) -> Result<SweepResult> {
    if n_points < 2 {
        return Err(Error::InfeasibleConstraint(
            "sweep resolution must be at least 2".into(),
        ));
    }
    let (lo, hi) = constraint.range()?;
    let width = hi - lo;

    let mut coords: Vec<f64> = (0..n_points)
        .map(|i| lo + width * (i as f64 + 1.0) / (n_points as f64 + 1.0))
        .collect();
    // Regime boundaries crossed by the line, plus one midpoint per segment
    // between them so that no regime interval, however thin, goes
    // unsampled.
    let mut cuts: Vec<f64> = constraint
        .critical_coords()
        .into_iter()
        .filter(|&c| c > lo && c < hi)
        .collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut segment_edges = vec![lo];
    segment_edges.extend_from_slice(&cuts);
    segment_edges.push(hi);
    coords.extend_from_slice(&cuts);
    coords.extend(segment_edges.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    coords.sort_by(|a, b| a.partial_cmp(b).unwrap());
    coords.dedup_by(|a, b| (*a - *b).abs() <= f64::EPSILON * width.abs());

    let points: Vec<SweepPoint> = coords
        .into_iter()
        .map(|coordinate| {
            let params = constraint.params_at(coordinate)?;
            Ok(SweepPoint {
                coordinate,
                params,
                report: classify(params),
            })
        })
        .collect::<Result<_>>()?;

    let intervals = collapse_intervals(&points);
    Ok(SweepResult {
        constraint,
        points,
        intervals,
    })
}

fn collapse_intervals(points: &[SweepPoint]) -> Vec<RegimeInterval> {
    let mut intervals: Vec<RegimeInterval> = Vec::new();
    for point in points {
        match intervals.last_mut() {
            Some(last) if last.regime == point.report.regime => {
                last.coord_hi = point.coordinate;
                last.degenerate = false;
            }
            _ => intervals.push(RegimeInterval {
                regime: point.report.regime,
                coord_lo: point.coordinate,
                coord_hi: point.coordinate,
                degenerate: true,
            }),
        }
    }
    // A single-point run flanked by other regimes is genuinely degenerate;
    // a single sampled point at the list ends is not evidence either way,
    // but marking it degenerate would be wrong only if the caller sampled
    // too coarsely, so leave ends as sampled.
    intervals
}

/// Least-squares fit of a growth exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentFit {
    /// Slope of `log Var` against `log t`.
    pub exponent: f64,
    /// Coefficient of determination of the fit.
    pub goodness: f64,
    /// Time range actually used.
    pub window: (u64, u64),
}

/// Fits `log Var` on `log t` over the trailing `window_fraction` of the
/// series' logarithmic time span.
pub fn fit_exponent(series: &MomentSeries, window_fraction: f64) -> Result<ExponentFit> {
    if !(window_fraction > 0.0 && window_fraction <= 1.0) {
        return Err(Error::DegenerateWindow(format!(
            "window fraction {window_fraction} is not in (0, 1]"
        )));
    }
    if series.is_empty() {
        return Err(Error::DegenerateWindow("empty series".into()));
    }
    let ln_first = (series.times[0] as f64).ln();
    let ln_last = (*series.times.last().unwrap() as f64).ln();
    let cutoff = ln_last - window_fraction * (ln_last - ln_first) - 1e-12;

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut window = (u64::MAX, 0u64);
    for (i, &t) in series.times.iter().enumerate() {
        let ln_t = (t as f64).ln();
        if ln_t < cutoff {
            continue;
        }
        let var = series.variance[i];
        if !var.is_finite() || var <= 0.0 {
            return Err(Error::DegenerateWindow(format!(
                "variance {var} at t = {t} is not positive"
            )));
        }
        xs.push(ln_t);
        ys.push(var.ln());
        window = (window.0.min(t), window.1.max(t));
    }
    if xs.len() < 3 {
        return Err(Error::DegenerateWindow(format!(
            "{} points in the trailing window, need at least 3",
            xs.len()
        )));
    }

    let n = xs.len() as f64;
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean).powi(2)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - x_mean) * (y - y_mean))
        .sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;

    let ss_tot: f64 = ys.iter().map(|y| (y - y_mean).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (intercept + slope * x)).powi(2))
        .sum();
    let goodness = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };

    Ok(ExponentFit {
        exponent: slope,
        goodness,
        window,
    })
}

/// Fit of the linear variance growth `Var(t) ~ 2 D t` with a decaying
/// correction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiffusionFit {
    /// Extrapolated limit of `Var / (2t)`.
    pub coefficient: f64,
    /// Amplitude of the fitted correction term.
    pub correction: f64,
    pub window: (u64, u64),
}

/// Estimates the diffusion coefficient as the intercept of the regression
/// `Var(t) / (2t) = D + c t^correction_exponent` over the whole series.
///
/// On the diffusive locus the subleading term of the variance is a known
/// power (`t^{-r}` on the `gamma = 1/2` segment), so fitting it out
/// extrapolates `Var/(2t)` to its limit far better than averaging.
pub fn fit_diffusion_coefficient(
    series: &MomentSeries,
    correction_exponent: f64,
) -> Result<DiffusionFit> {
    if series.len() < 3 {
        return Err(Error::DegenerateWindow(format!(
            "{} points, need at least 3",
            series.len()
        )));
    }
    if !correction_exponent.is_finite() || correction_exponent >= 0.0 {
        return Err(Error::DegenerateWindow(format!(
            "correction exponent {correction_exponent} must be negative"
        )));
    }
    let xs: Vec<f64> = series
        .times
        .iter()
        .map(|&t| (t as f64).powf(correction_exponent))
        .collect();
    let ys: Vec<f64> = series
        .times
        .iter()
        .zip(&series.variance)
        .map(|(&t, &v)| v / (2.0 * t as f64))
        .collect();
    let n = xs.len() as f64;
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateWindow(
            "correction regressor is constant over the window".into(),
        ));
    }
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - x_mean) * (y - y_mean))
        .sum();
    let slope = sxy / sxx;
    Ok(DiffusionFit {
        coefficient: y_mean - slope * x_mean,
        correction: slope,
        window: (series.times[0], *series.times.last().unwrap()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::variance_series;

    fn params(p: f64, q: f64, r: f64) -> Parameters {
        Parameters::new(p, q, r, 0.5).unwrap()
    }

    #[test]
    fn classify_reference_points() {
        // Unbiased memory with rests: subdiffusive t^{1-r}.
        let report = classify(params(0.3, 0.3, 0.4));
        assert_eq!(report.regime, Regime::SubdiffusiveRest);
        assert!((report.exponent - 0.6).abs() < 1e-12);

        // Strong persistence: superdiffusive t^{2 gamma}.
        let report = classify(params(0.8, 0.1, 0.1));
        assert_eq!(report.regime, Regime::Superdiffusive);
        assert!((report.exponent - 1.4).abs() < 1e-12);

        // Memory-dominated subdiffusion: 2 gamma = 0.5 beats 1 - r = 0.35.
        let report = classify(params(0.3, 0.05, 0.65));
        assert_eq!(report.regime, Regime::SubdiffusiveMemory);
        assert!((report.exponent - 0.5).abs() < 1e-12);

        // Diffusive segment gamma = 1/2 with rests.
        let report = classify(params(0.625, 0.125, 0.25));
        assert_eq!(report.regime, Regime::Diffusive);
        assert_eq!(report.exponent, 1.0);
        assert_eq!(report.log_correction, LogCorrection::Absent);

        // Diffusive segment r = 0 below gamma = 1/2, including gamma < 0.
        assert_eq!(classify(params(0.4, 0.6, 0.0)).regime, Regime::Diffusive);

        // Marginal point: t ln t.
        let report = classify(params(0.75, 0.25, 0.0));
        assert_eq!(report.regime, Regime::MarginalSuperdiffusive);
        assert_eq!(report.log_correction, LogCorrection::Present);

        // Balance line p = 3q: common exponent, log factor unresolved.
        let report = classify(params(0.3, 0.1, 0.6));
        assert_eq!(report.regime, Regime::BoundarySubdiffusive);
        assert!((report.exponent - 0.4).abs() < 1e-12);
        assert_eq!(report.log_correction, LogCorrection::Unknown);

        // Frozen edge.
        let report = classify(params(0.0, 0.0, 1.0));
        assert_eq!(report.regime, Regime::Frozen);
        assert_eq!(report.exponent, 0.0);
    }

    #[test]
    fn classify_exponent_rule() {
        // exponent = max(2 gamma, 1 - r) for gamma > 0, 1 - r otherwise.
        let cases = [
            params(0.35, 0.15, 0.5),
            params(0.45, 0.05, 0.5),
            params(0.2, 0.3, 0.5),
            params(0.1, 0.7, 0.2),
            params(0.48, 0.02, 0.5),
        ];
        for pr in cases {
            let report = classify(pr);
            let expected = if pr.gamma() > 0.0 {
                (2.0 * pr.gamma()).max(1.0 - pr.r())
            } else {
                1.0 - pr.r()
            };
            assert!(
                (report.exponent - expected).abs() < 1e-12,
                "{pr:?}: {report:?}"
            );
            if report.regime != Regime::Frozen {
                assert_eq!(
                    report.exponent > 1.0,
                    report.regime == Regime::Superdiffusive
                );
            }
        }
    }

    #[test]
    fn classify_changes_only_on_known_boundaries() {
        // Fine sweep at fixed r: the regime may change only where the line
        // crosses gamma = 0, 2 gamma = 1 - r, or gamma = 1/2.
        let r = 0.3;
        let n = 20_000;
        let mut last: Option<(f64, Regime)> = None;
        for i in 1..n {
            let g = -(1.0 - r) + 2.0 * (1.0 - r) * i as f64 / n as f64;
            let moves = 1.0 - r;
            let pr = Parameters::new((moves + g) / 2.0, (moves - g) / 2.0, r, 0.5).unwrap();
            let regime = classify(pr).regime;
            if let Some((prev_g, prev_regime)) = last {
                if prev_regime != regime {
                    let crossed = [0.0, (1.0 - r) / 2.0, 0.5]
                        .iter()
                        .any(|&b| prev_g < b + 1e-9 && g > b - 1e-9);
                    assert!(
                        crossed,
                        "regime changed between gamma {prev_g} and {g} away from a boundary"
                    );
                }
            }
            last = Some((g, regime));
        }

        // And at fixed gamma, crossing only 2 gamma = 1 - r (plus the r = 0
        // and r = 1 edges, which the open line never reaches).
        let g = 0.2;
        let mut last: Option<(f64, Regime)> = None;
        for i in 1..n {
            let r = (1.0 - g) * i as f64 / n as f64;
            let moves = 1.0 - r;
            let pr = Parameters::new((moves + g) / 2.0, (moves - g) / 2.0, r, 0.5).unwrap();
            let regime = classify(pr).regime;
            if let Some((prev_r, prev_regime)) = last {
                if prev_regime != regime {
                    let boundary = 1.0 - 2.0 * g;
                    assert!(
                        prev_r < boundary + 1e-9 && r > boundary - 1e-9,
                        "regime changed between r {prev_r} and {r} away from 2g = 1 - r"
                    );
                }
            }
            last = Some((r, regime));
        }
    }

    #[test]
    fn classify_exponent_matches_fit_on_interior_grid() {
        // Ten interior points, none close to a boundary or the balance
        // line: the predicted exponent and the trailing-decade fit of the
        // analytic variance agree within 0.03.
        let grid = [
            (-0.3, 0.5),
            (-0.1, 0.8),
            (0.1, 0.2),
            (0.05, 0.6),
            (0.2, 0.2),
            (0.3, 0.65),
            (0.4, 0.5),
            (0.45, 0.3),
            (0.6, 0.1),
            (0.7, 0.25),
        ];
        let times = geometric(1, 1_000_000);
        for (g, r) in grid {
            let moves = 1.0 - r;
            let pr = Parameters::new((moves + g) / 2.0, (moves - g) / 2.0, r, 0.5).unwrap();
            let report = classify(pr);
            assert_eq!(report.log_correction, LogCorrection::Absent, "{pr:?}");
            let series = variance_series(pr, &times).unwrap();
            let fit = fit_exponent(&series, 1.0 / 6.0).unwrap();
            assert!(
                (fit.exponent - report.exponent).abs() <= 0.03,
                "(gamma={g}, r={r}): predicted {} vs fitted {}",
                report.exponent,
                fit.exponent
            );
        }
    }

    #[test]
    fn sweep_fixed_p_high_persistence_covers_everything() {
        let sweep = sweep_line(SweepConstraint::FixedP(0.625), 50).unwrap();
        let regimes: Vec<Regime> = sweep.intervals.iter().map(|i| i.regime).collect();
        for needed in [
            Regime::Superdiffusive,
            Regime::Diffusive,
            Regime::SubdiffusiveMemory,
            Regime::SubdiffusiveRest,
        ] {
            assert!(
                regimes.contains(&needed),
                "missing {needed:?} in {regimes:?}"
            );
        }
        // Ordered by increasing q: superdiffusive first, rest-dominated last.
        let sup = regimes
            .iter()
            .position(|&r| r == Regime::Superdiffusive)
            .unwrap();
        let diff = regimes
            .iter()
            .position(|&r| r == Regime::Diffusive)
            .unwrap();
        let mem = regimes
            .iter()
            .position(|&r| r == Regime::SubdiffusiveMemory)
            .unwrap();
        let rest = regimes
            .iter()
            .position(|&r| r == Regime::SubdiffusiveRest)
            .unwrap();
        assert!(sup < diff && diff < mem && mem < rest);
        // The diffusive crossing is an isolated point on this line.
        let diffusive = sweep
            .intervals
            .iter()
            .find(|i| i.regime == Regime::Diffusive)
            .unwrap();
        assert!(diffusive.degenerate);
    }

    #[test]
    fn sweep_fixed_p_low_persistence_stays_subdiffusive() {
        let sweep = sweep_line(SweepConstraint::FixedP(0.3), 50).unwrap();
        for interval in &sweep.intervals {
            assert!(
                interval.regime.is_subdiffusive(),
                "unexpected {interval:?} on the p = 0.3 line"
            );
        }
    }

    #[test]
    fn sweep_fixed_r_above_half_never_reaches_diffusive() {
        let sweep = sweep_line(SweepConstraint::FixedR(0.6), 50).unwrap();
        for interval in &sweep.intervals {
            assert!(interval.regime.is_subdiffusive());
        }
    }

    #[test]
    fn sweep_separating_persistence_is_one_half() {
        // Any fixed p > 1/2 reaches superdiffusion; p < 1/2 never does.
        for &p in &[0.51, 0.6, 0.9] {
            let sweep = sweep_line(SweepConstraint::FixedP(p), 40).unwrap();
            assert!(sweep
                .intervals
                .iter()
                .any(|i| i.regime == Regime::Superdiffusive));
        }
        for &p in &[0.1, 0.3, 0.49] {
            let sweep = sweep_line(SweepConstraint::FixedP(p), 40).unwrap();
            assert!(sweep.intervals.iter().all(|i| i.regime.is_subdiffusive()));
        }
    }

    #[test]
    fn sweep_rejects_infeasible_constraints() {
        assert!(sweep_line(SweepConstraint::FixedP(1.0), 10).is_err());
        assert!(sweep_line(SweepConstraint::FixedP(-0.2), 10).is_err());
        assert!(sweep_line(SweepConstraint::FixedR(1.0), 10).is_err());
        assert!(sweep_line(SweepConstraint::FixedGamma(1.0), 10).is_err());
        assert!(sweep_line(SweepConstraint::FixedP(0.5), 1).is_err());
    }

    #[test]
    fn fit_exponent_recovers_synthetic_power_law() {
        let times: Vec<u64> = (0..20).map(|k| 10 * (1 << k) as u64).collect();
        let variance: Vec<f64> = times.iter().map(|&t| 3.5 * (t as f64).powf(0.7)).collect();
        let series = MomentSeries {
            mean: vec![0.0; times.len()],
            mean_sq: variance.clone(),
            variance,
            times,
        };
        let fit = fit_exponent(&series, 1.0).unwrap();
        assert!((fit.exponent - 0.7).abs() < 1e-12);
        assert!((fit.goodness - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_exponent_on_analytic_series() {
        // gamma = 0.35, r = 0.1: exponent max(0.7, 0.9) = 0.9.
        let pr = params(0.625, 0.275, 0.1);
        let times: Vec<u64> = geometric(1, 1_000_000);
        let series = variance_series(pr, &times).unwrap();
        let fit = fit_exponent(&series, 1.0 / 6.0).unwrap();
        assert!(
            (fit.exponent - 0.9).abs() < 0.03,
            "fitted {} for the rest-dominated regime",
            fit.exponent
        );
        assert!(fit.window.0 >= 100_000);
    }

    #[test]
    fn fit_exponent_marginal_point_shows_log_growth() {
        // gamma = 1/2, r = 0: Var = t H_t, so the pure power fit reads
        // slightly above 1 and Var/(t ln t) is flat late.
        let pr = params(0.75, 0.25, 0.0);
        let times: Vec<u64> = geometric(10_000, 1_000_000);
        let series = variance_series(pr, &times).unwrap();
        let fit = fit_exponent(&series, 1.0).unwrap();
        assert!(
            fit.exponent > 1.0 && fit.exponent < 1.12,
            "{}",
            fit.exponent
        );

        let late: Vec<f64> = series
            .times
            .iter()
            .zip(&series.variance)
            .filter(|(&t, _)| t >= 100_000)
            .map(|(&t, &v)| v / (t as f64 * (t as f64).ln()))
            .collect();
        let lo = late.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = late.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!((hi - lo) / lo < 0.05);
    }

    #[test]
    fn fit_exponent_rejects_degenerate_windows() {
        let series = MomentSeries {
            times: vec![10, 20],
            mean: vec![0.0; 2],
            mean_sq: vec![1.0, 2.0],
            variance: vec![1.0, 2.0],
        };
        assert!(fit_exponent(&series, 1.0).is_err());

        let series = MomentSeries {
            times: vec![10, 20, 40, 80],
            mean: vec![0.0; 4],
            mean_sq: vec![1.0, 2.0, 0.0, 3.0],
            variance: vec![1.0, 2.0, 0.0, 3.0],
        };
        assert!(fit_exponent(&series, 1.0).is_err());
        assert!(fit_exponent(&series, 0.0).is_err());
    }

    #[test]
    fn diffusion_fit_strips_known_correction() {
        // Synthetic Var/(2t) = D + c t^{-0.3} is recovered exactly.
        let times: Vec<u64> = geometric(1000, 10_000);
        let variance: Vec<f64> = times
            .iter()
            .map(|&t| 2.0 * (t as f64) * (1.25 - 0.8 * (t as f64).powf(-0.3)))
            .collect();
        let series = MomentSeries {
            mean: vec![0.0; times.len()],
            mean_sq: variance.clone(),
            variance,
            times,
        };
        let fit = fit_diffusion_coefficient(&series, -0.3).unwrap();
        assert!((fit.coefficient - 1.25).abs() < 1e-10);
        assert!((fit.correction + 0.8).abs() < 1e-9);
    }

    fn geometric(lo: u64, hi: u64) -> Vec<u64> {
        let mut times = Vec::new();
        let mut k = 0u32;
        loop {
            let t = (10f64.powf(k as f64 / 20.0)).round() as u64;
            if t > hi {
                break;
            }
            if t >= lo && times.last() != Some(&t) {
                times.push(t);
            }
            k += 1;
        }
        if times.last() != Some(&hi) {
            times.push(hi);
        }
        times
    }
}
