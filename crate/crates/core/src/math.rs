//! Special functions used by the tests and scores.

use crate::error::{Error, Result};

pub use libm::{exp, lgamma, log};

/// `x * ln(x)` with the `0 * ln(0) = 0` convention.
#[inline]
pub fn xlogx(x: f64) -> f64 {
    if x > 0.0 {
        x * log(x)
    } else {
        0.0
    }
}

const GAMMA_EPS: f64 = 1e-16;
const GAMMA_MAX_ITER: usize = 100_000;

/// Regularized upper incomplete gamma function `Q(a, x) = Γ(a, x) / Γ(a)`.
///
/// Series expansion of `P` below `x < a + 1`, Lentz continued fraction for `Q`
/// above it.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0);
    if x <= 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_fraction(a, x)
    }
}

fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..GAMMA_MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * GAMMA_EPS {
            break;
        }
    }
    exp(log(sum) + a * log(x) - x - lgamma(a))
}

fn gamma_q_fraction(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..GAMMA_MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < GAMMA_EPS {
            break;
        }
    }
    exp(log(h) + a * log(x) - x - lgamma(a))
}

/// Upper-tail probability `P(χ²_df ≥ x)`.
pub fn chisq_survival(x: f64, df: u64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "chi-square statistic must be non-negative, got {x}"
        )));
    }
    if df == 0 {
        return Err(Error::InvalidArgument("chi-square df must be positive".into()));
    }
    Ok(gamma_q(df as f64 / 2.0, x / 2.0).clamp(0.0, 1.0))
}
