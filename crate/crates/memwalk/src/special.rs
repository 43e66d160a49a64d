//! Gamma-function helpers: log-gamma, reciprocal gamma, and the ratio
//! `Gamma(t + a) / Gamma(t)` that all closed-form moments reduce to.
//!
//! The ratio is evaluated through differences of log-gamma for moderate `t`
//! and through an asymptotic expansion beyond that, so it stays accurate to
//! ~1e-10 relative up to `t = 1e9` without overflowing.

use crate::error::{Error, Result};

/// Above this count the log-gamma difference loses digits (the two logs grow
/// while their difference stays O(a ln t)), so we switch to the expansion.
const ASYMPTOTIC_THRESHOLD: u64 = 1024;

/// Polynomial coefficients for the Lanczos approximation of the gamma
/// function, after Pugh ("An Analysis of the Lanczos Gamma Approximation",
/// 2004, p. 116). Gives ~16 significant digits over the positive axis.
const LANCZOS_DK: [f64; 11] = [
    2.485_740_891_387_535_5e-5,
    1.051_423_785_817_219_7,
    -3.456_870_972_220_162_5,
    4.512_277_094_668_948,
    -2.982_852_253_235_766_4,
    1.056_397_115_771_267,
    -1.954_287_731_916_458_7e-1,
    1.709_705_434_044_412e-2,
    -5.719_261_174_043_057e-4,
    4.633_994_733_599_057e-6,
    -2.719_949_084_886_077_2e-9,
];

const LANCZOS_R: f64 = 10.900511;
const LN_PI: f64 = 1.144_729_885_849_400_2;
const LN_2_SQRT_E_OVER_PI: f64 = 0.620_782_237_635_245_2;

/// Natural log of the gamma function.
///
/// Accurate to ~16 significant digits; arguments on the non-positive integers
/// return infinity.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        let s = LANCZOS_DK
            .iter()
            .enumerate()
            .skip(1)
            .fold(LANCZOS_DK[0], |s, (i, &d)| s + d / (i as f64 - x));
        // Reflection through Gamma(x) Gamma(1-x) = pi / sin(pi x).
        LN_PI
            - (std::f64::consts::PI * x).sin().abs().ln()
            - s.ln()
            - LN_2_SQRT_E_OVER_PI
            - (0.5 - x) * ((0.5 - x + LANCZOS_R) / std::f64::consts::E).ln()
    } else {
        let s = LANCZOS_DK
            .iter()
            .enumerate()
            .skip(1)
            .fold(LANCZOS_DK[0], |s, (i, &d)| s + d / (x + i as f64 - 1.0));
        s.ln()
            + LN_2_SQRT_E_OVER_PI
            + (x - 0.5) * ((x - 0.5 + LANCZOS_R) / std::f64::consts::E).ln()
    }
}

/// Gamma function for strictly positive arguments.
pub fn gamma_pos(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    ln_gamma(x).exp()
}

/// `1 / Gamma(x)`, defined (and continuous) on the whole real line.
///
/// Returns exactly 0 at the poles `x = 0, -1, -2, ...`, which is what the
/// moment formulas rely on when a gamma factor in a denominator blows up.
pub fn reciprocal_gamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    if x >= 0.5 {
        (-ln_gamma(x)).exp()
    } else {
        // 1/Gamma(x) = sin(pi x) Gamma(1 - x) / pi
        (std::f64::consts::PI * x).sin() * ln_gamma(1.0 - x).exp() / std::f64::consts::PI
    }
}

/// `Gamma(t + offset) / Gamma(t)` for an integer count `t >= 1`.
///
/// Relative error is below 1e-10 for `t <= 1e9` and `|offset| <= 2`.
/// Fails when `t + offset` is not strictly positive, where the numerator
/// hits a pole or the reflection regime.
pub fn gamma_ratio(offset: f64, t: u64) -> Result<f64> {
    if t == 0 {
        return Err(Error::InvalidParameters(
            "gamma_ratio requires t >= 1".into(),
        ));
    }
    let tf = t as f64;
    let shifted = tf + offset;
    if shifted <= 0.0 {
        return Err(Error::GammaPole { arg: shifted });
    }
    if offset == 0.0 {
        return Ok(1.0);
    }
    if t >= ASYMPTOTIC_THRESHOLD {
        Ok(gamma_ratio_asymptotic(offset, tf))
    } else {
        Ok((ln_gamma(shifted) - ln_gamma(tf)).exp())
    }
}

/// Expansion of `ln Gamma(t+a) - ln Gamma(t)` in powers of `1/t`, with
/// Bernoulli-polynomial coefficients `B_{n+1}(a) - B_{n+1}(0)`.
/// Truncation error after the `1/t^5` term is ~1e-20 for `t >= 1024`,
/// `|a| <= 8`.
fn gamma_ratio_asymptotic(a: f64, t: f64) -> f64 {
    let a2 = a * a;
    let a3 = a2 * a;
    let a4 = a3 * a;
    let a5 = a4 * a;
    let a6 = a5 * a;
    let inv_t = 1.0 / t;

    let c1 = (a2 - a) / 2.0;
    let c2 = -(a3 - 1.5 * a2 + 0.5 * a) / 6.0;
    let c3 = (a4 - 2.0 * a3 + a2) / 12.0;
    let c4 = -(a5 - 2.5 * a4 + (5.0 / 3.0) * a3 - a / 6.0) / 20.0;
    let c5 = (a6 - 3.0 * a5 + 2.5 * a4 - 0.5 * a2) / 30.0;

    let tail = inv_t * (c1 + inv_t * (c2 + inv_t * (c3 + inv_t * (c4 + inv_t * c5))));
    (a * t.ln() + tail).exp()
}
