//! Variational Bayes decoders for a batch of periods sharing one phase.
//!
//! The exact posterior of `K` periods is a mixture of `M^K` von Mises terms.
//! The mean-field family `q(φ) Π_i q(l_i)` keeps it tractable:
//!
//! * `q(φ) = M(κ)` with `κ = κ0 + (2/r) Σ_i conj(â_i) g^H x_i`, where
//!   `â_i = Σ_m p_{m,i} a_m` is the soft symbol;
//! * `q(l_i) ∝ α_m exp(-|a_m|²||g||²/r + (2/r) δ_{m,i})`, where
//!   `δ_{m,i} = Re{conj(a_m) g^H x_i e^{-j∠κ}} · I1(|κ|)/I0(|κ|)`.
//!
//! [`vb_offline`] alternates the two updates over the whole batch. The online
//! decoder ([`vb_online_step`]) runs the exact single-period update and then
//! collapses the resulting phase mixture back to one von Mises term by the
//! same soft-symbol rule before moving to the next period.

use num_complex::Complex64;

use crate::decode_exact::{check_noise, exact_from_statistic, phase_mixture, SymbolPosterior};
use crate::dirstat::{ln_i0, ratio_i1_i0, PhaseMixture, VonMises};
use crate::sigmodel::{Batch, Constellation, PulseVector};
use crate::{Error, Result};

const LN_PI: f64 = 1.144_729_885_849_400_2;

/// Iteration controls for [`vb_offline`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VbConfig {
    pub max_iterations: usize,
    /// Stop once no symbol probability moves by this much in a sweep.
    pub tolerance: f64,
    /// Replaces `I1(|κ|)/I0(|κ|)` by a constant. `Some(1.0)` gives the EM
    /// (certainty-equivalent phase) update.
    pub ratio_override: Option<f64>,
}

impl Default for VbConfig {
    fn default() -> Self {
        Self { max_iterations: 100, tolerance: 1e-8, ratio_override: None }
    }
}

impl VbConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(Error::Config("max_iterations must be >= 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config(format!("tolerance must be > 0, got {}", self.tolerance)));
        }
        if let Some(v) = self.ratio_override {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Config(format!("ratio override must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VbStatus {
    Converged,
    /// Hit `max_iterations` with the last sweep still above tolerance.
    MaxIterations,
}

/// Result of an offline decode.
#[derive(Debug, Clone, PartialEq)]
pub struct VbState {
    /// Phase VB-marginal `M(κ)`.
    pub kappa: VonMises,
    pub symbol_posteriors: Vec<SymbolPosterior>,
    /// Completed sweeps.
    pub iteration: usize,
    /// ELBO after each sweep; empty when a ratio override is active since the
    /// overridden update is not a coordinate ascent step.
    pub elbo_trace: Vec<f64>,
    pub status: VbStatus,
}

/// `δ = Re{conj(a_m) (g^H x_i) e^{-j∠κ}} · I1(|κ|)/I0(|κ|)`; zero for `κ = 0`.
pub fn vb_delta(x_i: &[Complex64], a_m: Complex64, g: &PulseVector, kappa: Complex64, r: f64) -> Result<f64> {
    check_noise(r)?;
    let y = g.correlate(x_i)?;
    let dir = expected_rotation(kappa, None);
    Ok((a_m.conj() * y * dir).re)
}

/// `E_q[e^{-jφ}]` for `q = M(κ)`, or `ratio · e^{-j∠κ}` when overridden.
#[inline]
fn expected_rotation(kappa: Complex64, ratio_override: Option<f64>) -> Complex64 {
    let mag = kappa.norm();
    if mag == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let rho = ratio_override.unwrap_or_else(|| ratio_i1_i0(mag));
    kappa.conj() * (rho / mag)
}

/// One period's contribution `(2/r) conj(â) y` to the phase parameter.
#[inline]
fn evidence(a_hat: Complex64, y: Complex64, scale: f64) -> Complex64 {
    a_hat.conj() * y * scale
}

struct Prepared {
    y: Vec<Complex64>,
    x_energy: Vec<f64>,
    log_priors: Vec<Vec<f64>>,
    pilot: Vec<Option<usize>>,
}

impl Prepared {
    fn new(b: &Batch, c: &Constellation, p: &PulseVector) -> Result<Self> {
        let y = b.observations().iter().map(|x| p.correlate(x)).collect::<Result<Vec<_>>>()?;
        let x_energy = b.observations().iter().map(|x| x.iter().map(|v| v.norm_sqr()).sum()).collect();
        let log_priors = (0..b.len()).map(|i| b.log_prior(i, c)).collect();
        let pilot = (0..b.len()).map(|i| b.pilots().get(i).map(|l| l.0)).collect();
        Ok(Self { y, x_energy, log_priors, pilot })
    }
}

fn phase_parameter(prior: Complex64, prep: &Prepared, posts: &[SymbolPosterior], c: &Constellation, r: f64) -> Complex64 {
    let scale = 2.0 / r;
    let mut kappa = prior;
    for (y, sp) in prep.y.iter().zip(posts) {
        kappa += evidence(c.soft_symbol(sp.probs()), *y, scale);
    }
    kappa
}

/// Offline VB decode of a batch.
///
/// Symbol posteriors start from independent exact decoding under the prior.
/// Each sweep first updates `κ` from the current soft symbols, then every
/// non-pilot symbol posterior from `κ`. Pilot positions stay indicators.
/// Running out of iterations is reported through [`VbState::status`].
pub fn vb_offline(
    b: &Batch,
    c: &Constellation,
    p: &PulseVector,
    prior: &VonMises,
    r: f64,
    cfg: &VbConfig,
) -> Result<VbState> {
    check_noise(r)?;
    cfg.validate()?;
    let prep = Prepared::new(b, c, p)?;
    let scale = 2.0 / r;
    let bias: Vec<f64> = c.energies().iter().map(|e| -e * p.energy() / r).collect();

    let mut posts: Vec<SymbolPosterior> = (0..b.len())
        .map(|i| match prep.pilot[i] {
            Some(m) => SymbolPosterior::indicator(c.len(), m),
            None => exact_from_statistic(prep.y[i], &prep.log_priors[i], c, p.energy(), prior.kappa(), r).0,
        })
        .collect();

    let mut kappa = prior.kappa();
    let mut elbo_trace = Vec::new();
    let mut status = VbStatus::MaxIterations;
    let mut iteration = 0;
    while iteration < cfg.max_iterations {
        iteration += 1;
        kappa = phase_parameter(prior.kappa(), &prep, &posts, c, r);
        let rot = expected_rotation(kappa, cfg.ratio_override);

        let mut change: f64 = 0.0;
        for (i, post) in posts.iter_mut().enumerate() {
            if prep.pilot[i].is_some() {
                continue;
            }
            let u = prep.y[i] * rot;
            let lw: Vec<f64> = (0..c.len())
                .map(|m| prep.log_priors[i][m] + bias[m] + scale * (c.symbol(m).conj() * u).re)
                .collect();
            let next = SymbolPosterior::from_log_weights(lw);
            for (a, b) in next.probs().iter().zip(post.probs()) {
                change = change.max((a - b).abs());
            }
            *post = next;
        }
        if cfg.ratio_override.is_none() {
            elbo_trace.push(elbo_prepared(&prep, c, p, prior, r, kappa, &posts));
        }
        if change < cfg.tolerance {
            status = VbStatus::Converged;
            break;
        }
    }

    Ok(VbState {
        kappa: VonMises::new(kappa)?,
        symbol_posteriors: posts,
        iteration,
        elbo_trace,
        status,
    })
}

/// Evidence lower bound `E_q[ln f(x, l, φ)] + H(q)` for the mean-field
/// distribution `q(φ) = M(q_kappa)`, `q(l_i) = q_symbols[i]`.
pub fn elbo(
    b: &Batch,
    c: &Constellation,
    p: &PulseVector,
    prior: &VonMises,
    r: f64,
    q_kappa: Complex64,
    q_symbols: &[SymbolPosterior],
) -> Result<f64> {
    check_noise(r)?;
    if q_symbols.len() != b.len() {
        return Err(Error::Dimension { expected: b.len(), got: q_symbols.len() });
    }
    if let Some(bad) = q_symbols.iter().find(|s| s.len() != c.len()) {
        return Err(Error::Dimension { expected: c.len(), got: bad.len() });
    }
    let prep = Prepared::new(b, c, p)?;
    Ok(elbo_prepared(&prep, c, p, prior, r, q_kappa, q_symbols))
}

fn elbo_prepared(
    prep: &Prepared,
    c: &Constellation,
    p: &PulseVector,
    prior: &VonMises,
    r: f64,
    q_kappa: Complex64,
    q_symbols: &[SymbolPosterior],
) -> f64 {
    let q = VonMises::new(q_kappa).expect("finite phase parameter");
    let rot = expected_rotation(q_kappa, None);
    let k0 = prior.kappa();
    let log_norm_prior = std::f64::consts::TAU.ln() + ln_i0(prior.concentration());
    let mut total = (k0 * rot).re - log_norm_prior + q.entropy();

    let n = p.len() as f64;
    let log_lik_const = -n * (LN_PI + r.ln());
    for (i, sp) in q_symbols.iter().enumerate() {
        let u = prep.y[i] * rot;
        for (m, pm) in sp.probs().iter().enumerate() {
            if *pm == 0.0 {
                continue;
            }
            let delta = (c.symbol(m).conj() * u).re;
            let ll = log_lik_const - (prep.x_energy[i] + c.energies()[m] * p.energy() - 2.0 * delta) / r;
            total += pm * (ll + prep.log_priors[i][m] - pm.ln());
        }
    }
    total
}

/// Running state of the online decoder: the single von Mises parameter
/// carried from one period to the next.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnlineState {
    pub kappa_hat: Complex64,
    /// Periods consumed so far.
    pub t: usize,
}

impl OnlineState {
    pub fn new(prior: &VonMises) -> Self {
        Self { kappa_hat: prior.kappa(), t: 0 }
    }
}

/// One online period with the constellation priors.
pub fn vb_online_step(
    st: &OnlineState,
    x_t: &[Complex64],
    c: &Constellation,
    p: &PulseVector,
    r: f64,
) -> Result<(OnlineState, SymbolPosterior, PhaseMixture)> {
    vb_online_step_with_prior(st, x_t, c.log_priors(), c, p, r)
}

/// One online period: exact update with prior `M(κ̂)`, then conflation
/// `κ̂ ← κ̂ + (2/r) conj(â_t) g^H x_t`. Returns the pre-conflation phase
/// mixture.
pub fn vb_online_step_with_prior(
    st: &OnlineState,
    x_t: &[Complex64],
    log_prior: &[f64],
    c: &Constellation,
    p: &PulseVector,
    r: f64,
) -> Result<(OnlineState, SymbolPosterior, PhaseMixture)> {
    check_noise(r)?;
    if log_prior.len() != c.len() {
        return Err(Error::Dimension { expected: c.len(), got: log_prior.len() });
    }
    let y = p.correlate(x_t)?;
    let (sp, kappas) = exact_from_statistic(y, log_prior, c, p.energy(), st.kappa_hat, r);
    let mixture = phase_mixture(&sp, &kappas)?;
    let next = OnlineState {
        kappa_hat: st.kappa_hat + evidence(c.soft_symbol(sp.probs()), y, 2.0 / r),
        t: st.t + 1,
    };
    Ok((next, sp, mixture))
}

/// Output of [`decode_online`].
#[derive(Debug, Clone, PartialEq)]
pub struct OnlineOutcome {
    pub state: OnlineState,
    pub symbol_posteriors: Vec<SymbolPosterior>,
}

/// Runs [`vb_online_step`] across a batch in order, using indicator priors at
/// pilot positions.
pub fn decode_online(b: &Batch, c: &Constellation, p: &PulseVector, prior: &VonMises, r: f64) -> Result<OnlineOutcome> {
    check_noise(r)?;
    let mut state = OnlineState::new(prior);
    let mut symbol_posteriors = Vec::with_capacity(b.len());
    for (i, x) in b.observations().iter().enumerate() {
        let lp = b.log_prior(i, c);
        // the mixture is only needed by callers stepping manually
        let y = p.correlate(x)?;
        let (sp, _) = exact_from_statistic(y, &lp, c, p.energy(), state.kappa_hat, r);
        state = OnlineState {
            kappa_hat: state.kappa_hat + evidence(c.soft_symbol(sp.probs()), y, 2.0 / r),
            t: state.t + 1,
        };
        symbol_posteriors.push(sp);
    }
    Ok(OnlineOutcome { state, symbol_posteriors })
}
