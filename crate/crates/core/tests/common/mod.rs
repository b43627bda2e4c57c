//! Independent oracles shared by the integration tests. Nothing here calls
//! into the decoding or Bessel code under test.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use vbsync::sigmodel::{Constellation, PulseVector};

/// Double-double number: `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd { hi: s, lo: b - (s - a) }
}

impl Dd {
    pub fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        quick_two_sum(s, e + self.lo + o.lo)
    }

    pub fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p) + self.hi * o.lo + self.lo * o.hi;
        quick_two_sum(p, e)
    }

    pub fn div_f64(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        let p = q1 * b;
        let pe = q1.mul_add(b, -p);
        let (s, e) = two_sum(self.hi, -p);
        let r = s + (e - pe + self.lo);
        quick_two_sum(q1, r / b)
    }

    pub fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.add(o.mul(Dd::from(-q1)));
        let q2 = r.hi / o.hi;
        quick_two_sum(q1, q2)
    }
}

/// `(ln I0(x), I1(x)/I0(x))` from the ascending power series summed in
/// double-double arithmetic.
pub fn bessel_series_oracle(x: f64) -> (f64, f64) {
    let q = Dd::from(x).mul(Dd::from(x)).mul(Dd::from(0.25));
    let mut t0 = Dd::from(1.0);
    let mut t1 = Dd::from(1.0);
    let mut tail0 = Dd::from(0.0);
    let mut s1 = Dd::from(1.0);
    for k in 1..20_000u64 {
        let kf = k as f64;
        t0 = t0.mul(q).div_f64(kf * kf);
        t1 = t1.mul(q).div_f64(kf * (kf + 1.0));
        tail0 = tail0.add(t0);
        s1 = s1.add(t1);
        if k > 2 && t0.hi < 1e-34 * (1.0 + tail0.hi) {
            break;
        }
    }
    let ln_i0 = tail0.hi.ln_1p() + tail0.lo / (1.0 + tail0.hi);
    let s0 = Dd::from(1.0).add(tail0);
    let ratio = s1.div(s0).mul(Dd::from(0.5 * x));
    (ln_i0, ratio.hi)
}

pub fn ln_sum_exp(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

fn softmax(v: &[f64]) -> Vec<f64> {
    let z = ln_sum_exp(v);
    v.iter().map(|x| (x - z).exp()).collect()
}

pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// `ln f(x | φ, m)` with the normalizing constant of the complex normal.
pub fn log_likelihood(x: &[Complex64], a: Complex64, pulse: &PulseVector, phi: f64, r: f64) -> f64 {
    let rot = Complex64::from_polar(1.0, phi);
    let dist: f64 = x.iter().zip(pulse.g()).map(|(x, g)| (x - a * g * rot).norm_sqr()).sum();
    -(x.len() as f64) * (PI * r).ln() - dist / r
}

/// Log density of `M(κ0)` from its definition, with `ln I0(|κ0|)` taken
/// from the double-double series.
pub fn log_prior_density(kappa0: Complex64, phi: f64) -> f64 {
    let (ln_i0, _) = bessel_series_oracle(kappa0.norm());
    (kappa0 * Complex64::from_polar(1.0, -phi)).re - (2.0 * PI).ln() - ln_i0
}

fn grid(points: usize) -> Vec<f64> {
    (0..points).map(|j| -PI + 2.0 * PI * j as f64 / points as f64).collect()
}

/// Exact single-period symbol posterior by trapezoidal quadrature over the
/// phase (periodic integrand, so the rule is spectrally accurate).
pub fn quadrature_posterior(
    x: &[Complex64],
    c: &Constellation,
    pulse: &PulseVector,
    kappa0: Complex64,
    r: f64,
    points: usize,
) -> Vec<f64> {
    let phis = grid(points);
    let prior: Vec<f64> = phis.iter().map(|p| (kappa0 * Complex64::from_polar(1.0, -p)).re).collect();
    let logs: Vec<f64> = (0..c.len())
        .map(|m| {
            let vals: Vec<f64> = phis
                .iter()
                .zip(&prior)
                .map(|(phi, lp)| lp + log_likelihood(x, c.symbol(m), pulse, *phi, r))
                .collect();
            c.priors()[m].ln() + ln_sum_exp(&vals)
        })
        .collect();
    softmax(&logs)
}

/// Exact marginals and log-evidence of a batch by enumerating all `M^K`
/// label sequences and integrating the phase numerically.
pub struct Enumerated {
    pub marginals: Vec<Vec<f64>>,
    pub log_evidence: f64,
}

pub fn enumerate_batch(
    xs: &[Vec<Complex64>],
    c: &Constellation,
    pulse: &PulseVector,
    kappa0: Complex64,
    r: f64,
    points: usize,
) -> Enumerated {
    let k = xs.len();
    let m = c.len();
    let phis = grid(points);
    let dphi = 2.0 * PI / points as f64;
    let prior: Vec<f64> = phis.iter().map(|p| log_prior_density(kappa0, *p)).collect();
    // per (period, symbol, grid point) log-likelihood
    let ll: Vec<Vec<Vec<f64>>> = xs
        .iter()
        .map(|x| (0..m).map(|s| phis.iter().map(|p| log_likelihood(x, c.symbol(s), pulse, *p, r)).collect()).collect())
        .collect();
    let total = m.pow(k as u32);
    let mut config_logs = Vec::with_capacity(total);
    let mut configs = Vec::with_capacity(total);
    for code in 0..total {
        let labels: Vec<usize> = (0..k).map(|i| (code / m.pow(i as u32)) % m).collect();
        let label_prior: f64 = labels.iter().map(|l| c.priors()[*l].ln()).sum();
        let vals: Vec<f64> = (0..points)
            .map(|j| prior[j] + labels.iter().enumerate().map(|(i, l)| ll[i][*l][j]).sum::<f64>())
            .collect();
        config_logs.push(label_prior + ln_sum_exp(&vals) + dphi.ln());
        configs.push(labels);
    }
    let log_evidence = ln_sum_exp(&config_logs);
    let mut marginals = vec![vec![0.0; m]; k];
    for (labels, lw) in configs.iter().zip(&config_logs) {
        let w = (lw - log_evidence).exp();
        for (i, l) in labels.iter().enumerate() {
            marginals[i][*l] += w;
        }
    }
    Enumerated { marginals, log_evidence }
}

/// Kolmogorov–Smirnov statistic of samples against the uniform law on
/// `[-π, π]`.
pub fn ks_uniform(samples: &mut [f64]) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let f = (s + PI) / (2.0 * PI);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}
