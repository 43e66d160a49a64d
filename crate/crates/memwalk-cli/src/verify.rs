//! Self-verification: exact-enumeration oracle against the closed-form
//! moments over a parameter grid, plus the transition-law property suite.

use memwalk::exact;
use memwalk::model::{step_distribution, step_distribution_reference, Parameters, Step, WalkState};
use memwalk::moments::{mean_displacement, mean_square_displacement};

const GRID_T_MAX: u64 = 50;
const MOMENT_TOLERANCE: f64 = 1e-9;
const LAW_TOLERANCE: f64 = 1e-12;

/// Interior points plus every special edge: r = 0, gamma = 0, q = 0, the
/// p = 3q singular line, the frozen edge, and gamma < 0 down to q = 1.
fn grid() -> Vec<(f64, f64, f64)> {
    vec![
        (0.5, 0.3, 0.2),
        (0.4, 0.3, 0.3),
        (0.2, 0.5, 0.3),
        (0.3, 0.4, 0.3),
        (0.6, 0.3, 0.1),
        (0.7, 0.3, 0.0),
        (0.4, 0.6, 0.0),
        (0.75, 0.25, 0.0),
        (0.5, 0.5, 0.0),
        (0.3, 0.3, 0.4),
        (0.45, 0.45, 0.1),
        (0.1, 0.1, 0.8),
        (0.6, 0.0, 0.4),
        (1.0, 0.0, 0.0),
        (0.3, 0.0, 0.7),
        (0.3, 0.1, 0.6),
        (0.6, 0.2, 0.2),
        (0.15, 0.05, 0.8),
        (0.01, 0.01, 0.98),
        (0.0, 0.0, 1.0),
        (0.1, 0.6, 0.3),
        (0.05, 0.9, 0.05),
        (0.0, 1.0, 0.0),
        (0.2, 0.2, 0.6),
    ]
}

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn unit(state: &mut u64) -> f64 {
    (splitmix(state) >> 11) as f64 / (1u64 << 53) as f64
}

struct Check {
    name: &'static str,
    cases: usize,
    worst: f64,
    tolerance: f64,
}

impl Check {
    fn passed(&self) -> bool {
        self.worst <= self.tolerance
    }
}

/// Runs the whole table. `perturb` offsets `p` inside the analytic
/// comparison (a testing aid to prove the gate can fail); exit status is
/// the return value.
pub fn run(perturb: f64) -> bool {
    let mut checks = Vec::new();

    // Oracle vs closed forms over the grid.
    let mut worst = 0.0f64;
    let mut cases = 0;
    for (p, q, r) in grid() {
        for s in [0.5, 1.0] {
            let pr = Parameters::new(p, q, r, s).expect("grid points are valid");
            let analytic_params = if perturb != 0.0 {
                Parameters::renormalized(p + perturb, q, r, s).expect("perturbed point")
            } else {
                pr
            };
            cases += 1;
            for level in exact::evolve(pr, GRID_T_MAX).expect("within ceiling") {
                let t = level.t();
                let (dp_mean, dp_mean_sq) = level.moments();
                let mean = mean_displacement(analytic_params, t);
                let mean_sq = mean_square_displacement(analytic_params, t);
                let dev = rel(dp_mean, mean).max(rel(dp_mean_sq, mean_sq));
                worst = worst.max(dev);
            }
        }
    }
    checks.push(Check {
        name: "oracle-vs-analytic moments (t <= 50)",
        cases,
        worst,
        tolerance: MOMENT_TOLERANCE,
    });

    // Transition-law property suite over random reachable states.
    let mut state_seed = 0xABCDu64;
    let mut worst_urn = 0.0f64;
    let mut worst_norm = 0.0f64;
    let mut worst_mirror = 0.0f64;
    let n_states = 1000;
    for _ in 0..n_states {
        let mut a = unit(&mut state_seed);
        let mut b = unit(&mut state_seed);
        if a + b > 1.0 {
            a = 1.0 - a;
            b = 1.0 - b;
        }
        let pr = Parameters::new(a, b, 1.0 - a - b, unit(&mut state_seed)).expect("simplex");
        let mut walk = WalkState::first(if splitmix(&mut state_seed).is_multiple_of(2) {
            Step::Plus
        } else {
            Step::Minus
        })
        .expect("move");
        for _ in 0..splitmix(&mut state_seed) % 50 {
            walk = walk.apply(match splitmix(&mut state_seed) % 3 {
                0 => Step::Minus,
                1 => Step::Zero,
                _ => Step::Plus,
            });
        }

        let d = step_distribution(pr, walk);
        let reference = step_distribution_reference(pr, walk);
        for step in Step::ALL {
            worst_urn = worst_urn.max((d.probability(step) - reference.probability(step)).abs());
        }
        worst_norm = worst_norm.max((d.total() - 1.0).abs());
        let mirrored = WalkState::from_counts(walk.n_minus(), walk.n_plus(), walk.n_zero())
            .expect("mirror of a reachable state is reachable");
        let m = step_distribution(pr, mirrored);
        worst_mirror = worst_mirror
            .max((d.p_plus - m.p_minus).abs())
            .max((d.p_minus - m.p_plus).abs())
            .max((d.p_zero - m.p_zero).abs());
    }
    checks.push(Check {
        name: "recall-procedure equivalence",
        cases: n_states,
        worst: worst_urn,
        tolerance: LAW_TOLERANCE,
    });
    checks.push(Check {
        name: "step-law normalization",
        cases: n_states,
        worst: worst_norm,
        tolerance: LAW_TOLERANCE,
    });
    checks.push(Check {
        name: "mirror symmetry",
        cases: n_states,
        worst: worst_mirror,
        tolerance: LAW_TOLERANCE,
    });

    println!(
        "{:<42} {:>6} {:>12} {:>10} {:>7}",
        "check", "cases", "worst", "tolerance", "status"
    );
    let mut all_passed = true;
    for check in &checks {
        all_passed &= check.passed();
        println!(
            "{:<42} {:>6} {:>12.3e} {:>10.0e} {:>7}",
            check.name,
            check.cases,
            check.worst,
            check.tolerance,
            if check.passed() { "ok" } else { "FAILED" }
        );
    }
    all_passed
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}
