//! Exact inference for a single symbol period.
//!
//! With a von Mises prior `M(κ0)` on the phase, the joint posterior of one
//! period is available in closed form: the phase posterior is an `M`-term
//! von Mises mixture with components
//! `κ_m = κ0 + (2/r) conj(a_m) g^H x`, and the symbol posterior is
//! `p_m ∝ α_m exp(-|a_m|²||g||²/r) I0(|κ_m|)`.

use num_complex::Complex64;

use crate::dirstat::{arg, ln_i0, PhaseMixture, VonMises};
use crate::sigmodel::{Batch, Constellation, Label, PulseVector};
use crate::{Error, Result};

/// Posterior over the constellation for one period.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolPosterior {
    probs: Vec<f64>,
    log_weights: Vec<f64>,
}

impl SymbolPosterior {
    /// Normalizes unnormalized log weights with max subtraction. At least one
    /// weight must be finite.
    pub fn from_log_weights(log_weights: Vec<f64>) -> Self {
        let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut probs: Vec<f64> = log_weights.iter().map(|w| (w - max).exp()).collect();
        let total: f64 = probs.iter().sum();
        for p in &mut probs {
            *p /= total;
        }
        Self { probs, log_weights }
    }

    /// Point mass on symbol `m` of an `size`-symbol alphabet.
    pub fn indicator(size: usize, m: usize) -> Self {
        let log_weights = (0..size).map(|k| if k == m { 0.0 } else { f64::NEG_INFINITY }).collect();
        let probs = (0..size).map(|k| if k == m { 1.0 } else { 0.0 }).collect();
        Self { probs, log_weights }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn map(&self) -> Label {
        map_symbol(self)
    }
}

/// Most probable symbol; ties go to the lowest index.
pub fn map_symbol(sp: &SymbolPosterior) -> Label {
    let mut best = 0;
    for (m, p) in sp.probs.iter().enumerate() {
        if *p > sp.probs[best] {
            best = m;
        }
    }
    Label(best)
}

/// Per-symbol component parameters `κ_m` and the resulting posterior, given
/// the matched-filter output `y = g^H x`.
pub(crate) fn exact_from_statistic(
    y: Complex64,
    log_prior: &[f64],
    c: &Constellation,
    pulse_energy: f64,
    prior: Complex64,
    r: f64,
) -> (SymbolPosterior, Vec<Complex64>) {
    let scale = 2.0 / r;
    let uniform_prior = prior.re == 0.0 && prior.im == 0.0;
    let y_mag = y.norm();
    let mut kappas = Vec::with_capacity(c.len());
    let mut log_weights = Vec::with_capacity(c.len());
    for (m, lp) in log_prior.iter().enumerate() {
        let kappa = prior + c.symbol(m).conj() * y * scale;
        // with κ0 = 0, |κ_m| depends on the symbol only through |a_m|
        let mag = if uniform_prior { scale * c.magnitudes()[m] * y_mag } else { kappa.norm() };
        log_weights.push(lp - c.energies()[m] * pulse_energy / r + ln_i0(mag));
        kappas.push(kappa);
    }
    (SymbolPosterior::from_log_weights(log_weights), kappas)
}

pub(crate) fn check_noise(r: f64) -> Result<()> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("noise variance must be positive, got {r}")));
    }
    Ok(())
}

/// Exact posterior of one period under prior `M(κ0)`.
pub fn posterior_single(
    x: &[Complex64],
    c: &Constellation,
    p: &PulseVector,
    prior: &VonMises,
    r: f64,
) -> Result<(SymbolPosterior, PhaseMixture)> {
    posterior_single_with_prior(x, c.log_priors(), c, p, prior, r)
}

/// As [`posterior_single`], with per-period log symbol priors (pilots use an
/// indicator).
pub fn posterior_single_with_prior(
    x: &[Complex64],
    log_prior: &[f64],
    c: &Constellation,
    p: &PulseVector,
    prior: &VonMises,
    r: f64,
) -> Result<(SymbolPosterior, PhaseMixture)> {
    check_noise(r)?;
    if log_prior.len() != c.len() {
        return Err(Error::Dimension { expected: c.len(), got: log_prior.len() });
    }
    let y = p.correlate(x)?;
    let (sp, kappas) = exact_from_statistic(y, log_prior, c, p.energy(), prior.kappa(), r);
    let mixture = phase_mixture(&sp, &kappas)?;
    Ok((sp, mixture))
}

pub(crate) fn phase_mixture(sp: &SymbolPosterior, kappas: &[Complex64]) -> Result<PhaseMixture> {
    let components = kappas.iter().map(|k| VonMises::new(*k)).collect::<Result<Vec<_>>>()?;
    PhaseMixture::new(sp.probs().to_vec(), components)
}

/// Decodes every period on its own with the same fixed prior. Pilot
/// positions get the indicator posterior on their known symbol.
pub fn decode_independent(
    b: &Batch,
    c: &Constellation,
    p: &PulseVector,
    prior: &VonMises,
    r: f64,
) -> Result<Vec<SymbolPosterior>> {
    check_noise(r)?;
    let mut out = Vec::with_capacity(b.len());
    for (i, x) in b.observations().iter().enumerate() {
        if let Some(Label(m)) = b.pilots().get(i) {
            out.push(SymbolPosterior::indicator(c.len(), m));
            continue;
        }
        let y = p.correlate(x)?;
        out.push(exact_from_statistic(y, c.log_priors(), c, p.energy(), prior.kappa(), r).0);
    }
    Ok(out)
}

/// Mean phase direction of each mixture component.
pub fn component_angles(m: &PhaseMixture) -> Vec<f64> {
    m.components().iter().map(|c| arg(c.kappa())).collect()
}
