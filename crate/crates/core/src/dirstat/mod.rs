//! Directional statistics on the unit circle.
//!
//! A [`VonMises`] distribution is parameterized by one complex number `κ`:
//! the density is `exp(Re{κ e^{-jφ}}) / (2π I0(|κ|))`, so `∠κ` is the mean
//! direction and `|κ|` the concentration. `κ = 0` is the uniform
//! distribution on the circle.

mod bessel;

pub use bessel::{bessel_ratio, log_bessel_i0, SERIES_LIMIT};
pub(crate) use bessel::{ln_i0, ratio_i1_i0};

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::{Error, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Reduces an angle to the principal interval `(-π, π]`.
pub fn principal_angle(theta: f64) -> f64 {
    let mut t = theta % (2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    } else if t <= -PI {
        t += 2.0 * PI;
    }
    t
}

/// Argument of `z` in `(-π, π]`; zero for `z = 0`.
#[inline]
pub fn arg(z: Complex64) -> f64 {
    principal_angle(z.im.atan2(z.re))
}

/// Von Mises (Tikhonov) distribution with complex shaping parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VonMises {
    kappa: Complex64,
}

impl VonMises {
    pub fn new(kappa: Complex64) -> Result<Self> {
        if !kappa.re.is_finite() || !kappa.im.is_finite() {
            return Err(Error::Domain(format!("shaping parameter must be finite, got {kappa}")));
        }
        Ok(Self { kappa })
    }

    /// Builds `κ = magnitude · e^{j·angle}`.
    pub fn from_polar(magnitude: f64, angle: f64) -> Result<Self> {
        if !(magnitude >= 0.0) || !magnitude.is_finite() || !angle.is_finite() {
            return Err(Error::Domain(format!(
                "need finite magnitude >= 0 and finite angle, got ({magnitude}, {angle})"
            )));
        }
        Self::new(Complex64::from_polar(magnitude, angle))
    }

    pub fn uniform() -> Self {
        Self { kappa: Complex64::new(0.0, 0.0) }
    }

    #[inline]
    pub fn kappa(&self) -> Complex64 {
        self.kappa
    }

    #[inline]
    pub fn concentration(&self) -> f64 {
        self.kappa.norm()
    }

    pub fn is_uniform(&self) -> bool {
        self.kappa.re == 0.0 && self.kappa.im == 0.0
    }

    /// `Re{κ e^{-jφ}} - ln 2π - ln I0(|κ|)`.
    pub fn log_pdf(&self, phi: f64) -> Result<f64> {
        if !phi.is_finite() {
            return Err(Error::Domain(format!("angle must be finite, got {phi}")));
        }
        let (s, c) = phi.sin_cos();
        let align = self.kappa.re * c + self.kappa.im * s;
        Ok(align - LN_2PI - ln_i0(self.concentration()))
    }

    /// Mean direction `∠κ` in `(-π, π]`.
    pub fn mean(&self) -> Result<f64> {
        if self.is_uniform() {
            return Err(Error::UndefinedMean);
        }
        Ok(arg(self.kappa))
    }

    /// `1 - I1(|κ|)/I0(|κ|)`.
    pub fn circular_variance(&self) -> f64 {
        1.0 - ratio_i1_i0(self.concentration())
    }

    /// First trigonometric moment `E[e^{jφ}] = ρ(|κ|) e^{j∠κ}`.
    pub fn resultant(&self) -> Complex64 {
        let mag = self.concentration();
        if mag == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        self.kappa * (ratio_i1_i0(mag) / mag)
    }

    /// Differential entropy `ln(2π I0(|κ|)) - |κ| ρ(|κ|)`.
    pub fn entropy(&self) -> f64 {
        let mag = self.concentration();
        LN_2PI + ln_i0(mag) - mag * ratio_i1_i0(mag)
    }

    /// Draws one angle in `(-π, π]` with the Best–Fisher rejection sampler.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let k = self.concentration();
        if k == 0.0 {
            return principal_angle(PI * (2.0 * rng.random::<f64>() - 1.0));
        }
        // tau - sqrt(2 tau) rewritten to avoid cancellation for small k
        let root = (1.0 + 4.0 * k * k).sqrt();
        let tau = 1.0 + root;
        let tau_m2 = 4.0 * k * k / (root + 1.0);
        let rho = tau * tau_m2 / (tau + (2.0 * tau).sqrt()) / (2.0 * k);
        let s = (1.0 + rho * rho) / (2.0 * rho);
        loop {
            let u1: f64 = rng.random();
            let u2: f64 = rng.random();
            let u3: f64 = rng.random();
            let z = (PI * u1).cos();
            let f = (1.0 + s * z) / (s + z);
            let c = k * (s - f);
            if c * (2.0 - c) > u2 || (c / u2).ln() + 1.0 >= c {
                let theta = f.clamp(-1.0, 1.0).acos();
                let theta = if u3 > 0.5 { theta } else { -theta };
                return principal_angle(theta + arg(self.kappa));
            }
        }
    }
}

/// Weighted mixture of von Mises components.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMixture {
    weights: Vec<f64>,
    components: Vec<VonMises>,
}

impl PhaseMixture {
    pub fn new(weights: Vec<f64>, components: Vec<VonMises>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Config("phase mixture needs at least one component".into()));
        }
        if weights.len() != components.len() {
            return Err(Error::Dimension { expected: components.len(), got: weights.len() });
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|w| !(*w >= 0.0)) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("mixture weights must be a probability vector (sum {total})")));
        }
        Ok(Self { weights, components })
    }

    pub fn single(component: VonMises) -> Self {
        Self { weights: vec![1.0], components: vec![component] }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[VonMises] {
        &self.components
    }

    /// `E[e^{jφ}]` under the mixture: `Σ w_l ρ(|κ_l|) e^{j∠κ_l}`.
    pub fn resultant(&self) -> Complex64 {
        self.weights
            .iter()
            .zip(&self.components)
            .map(|(w, c)| c.resultant() * *w)
            .sum()
    }

    pub fn log_pdf(&self, phi: f64) -> Result<f64> {
        let mut terms = Vec::with_capacity(self.weights.len());
        for (w, c) in self.weights.iter().zip(&self.components) {
            if *w > 0.0 {
                terms.push(w.ln() + c.log_pdf(phi)?);
            }
        }
        Ok(log_sum_exp(&terms))
    }
}

/// `ln Σ exp(v_i)`, with `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}
