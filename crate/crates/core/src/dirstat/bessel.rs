//! Log-domain modified Bessel kernels of the first kind.
//!
//! `I0(x)` grows like `e^x / sqrt(2πx)`, so it overflows an f64 near
//! `x ≈ 713`. Concentrations reached by the decoders scale with
//! `K·n/r` and easily exceed that, which is why everything here is
//! expressed as `ln I0(x)` or as the ratio `I1(x)/I0(x)`.
//!
//! Below [`SERIES_LIMIT`] both kernels use the ascending power series; above
//! it they use the Hankel asymptotic expansion truncated at its smallest
//! term. At the split the truncation error of the expansion is below 1e-13.

use crate::{Error, Result};

/// Switch-over point between the power series and the asymptotic expansion.
pub const SERIES_LIMIT: f64 = 15.0;

const MAX_TERMS: usize = 500;

fn check(x: f64) -> Result<()> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain(format!("Bessel argument must be finite and >= 0, got {x}")));
    }
    Ok(())
}

/// `ln I0(x)` for `x >= 0`.
pub fn log_bessel_i0(x: f64) -> Result<f64> {
    check(x)?;
    Ok(ln_i0(x))
}

/// `I1(x) / I0(x)` for `x >= 0`. The value is in `[0, 1)` and strictly
/// increasing; it equals the mean resultant length of a von Mises
/// distribution with concentration `x`.
pub fn bessel_ratio(x: f64) -> Result<f64> {
    check(x)?;
    Ok(ratio_i1_i0(x))
}

/// Unchecked `ln I0`. Callers guarantee `x` is finite and non-negative.
#[inline]
pub(crate) fn ln_i0(x: f64) -> f64 {
    if x < SERIES_LIMIT {
        // ln(1 + Σ_{k≥1} q^k/(k!)²) keeps full relative precision near 0
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut tail = 0.0;
        for k in 1..MAX_TERMS {
            let kf = k as f64;
            term *= q / (kf * kf);
            tail += term;
            if term <= f64::EPSILON * 1e-2 * (1.0 + tail) {
                break;
            }
        }
        tail.ln_1p()
    } else {
        let (s0, _) = asymptotic_sums(x, false);
        x - 0.5 * (2.0 * std::f64::consts::PI * x).ln() + (s0 - 1.0).ln_1p()
    }
}

/// Unchecked `I1/I0`. Callers guarantee `x` is finite and non-negative.
#[inline]
pub(crate) fn ratio_i1_i0(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if x < SERIES_LIMIT {
        let q = 0.25 * x * x;
        let mut t0 = 1.0;
        let mut t1 = 1.0;
        let mut s0 = 1.0;
        let mut s1: f64 = 1.0;
        for k in 1..MAX_TERMS {
            let kf = k as f64;
            t0 *= q / (kf * kf);
            t1 *= q / (kf * (kf + 1.0));
            s0 += t0;
            s1 += t1;
            if t0 <= f64::EPSILON * 1e-2 * s0 {
                break;
            }
        }
        0.5 * x * s1 / s0
    } else {
        let (s0, s1) = asymptotic_sums(x, true);
        s1 / s0
    }
}

/// Scaled Hankel sums `S0 = I0(x)·sqrt(2πx)·e^{-x}` and, when asked,
/// `S1` for `I1`. Each series stops at its smallest term.
fn asymptotic_sums(x: f64, with_i1: bool) -> (f64, f64) {
    let inv8x = 1.0 / (8.0 * x);
    let mut s0 = 1.0;
    let mut t = 1.0;
    for k in 1..MAX_TERMS {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        let next = t * odd * odd * inv8x / kf;
        if next >= t || next < f64::EPSILON * 1e-2 * s0 {
            if next < t {
                s0 += next;
            }
            break;
        }
        t = next;
        s0 += t;
    }
    if !with_i1 {
        return (s0, 0.0);
    }
    let mut s1: f64 = 1.0;
    let mut t = 1.0f64;
    for k in 1..MAX_TERMS {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        let next = t * (odd * odd - 4.0) * inv8x / kf;
        if next.abs() >= t.abs() || next.abs() < f64::EPSILON * 1e-2 * s1.abs() {
            if next.abs() < t.abs() {
                s1 += next;
            }
            break;
        }
        t = next;
        s1 += t;
    }
    (s0, s1)
}
