//! Signal model: constellations, the known pulse/carrier vector, and an AWGN
//! channel that rotates every period by the same unknown phase.
//!
//! One symbol period produces `x_i = a_{m_i} g e^{jφ} + w_i`, where `g` is the
//! length-`n` modulation vector and `w_i` is circular complex Gaussian noise
//! with `E|w_{i,k}|² = r`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dirstat::principal_angle;
use crate::{Error, Result};

/// Modulation family accepted by [`Constellation::new`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstellationKind {
    Psk,
    Qam,
}

/// Finite alphabet of complex symbols with prior probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    symbols: Vec<Complex64>,
    priors: Vec<f64>,
    log_priors: Vec<f64>,
    norms_sq: Vec<f64>,
    norms: Vec<f64>,
    name: String,
}

impl Constellation {
    /// Unit-energy PSK or square QAM with uniform priors.
    ///
    /// PSK points run counter-clockwise; for `M >= 3` they sit at angles
    /// `(2m+1)π/M`, and BPSK is `{+1, -1}`. When `M` is a multiple of four the
    /// first quadrant is computed once and rotated by exact multiplications
    /// with `j`, so symbols on one ring have bit-identical magnitudes. QAM
    /// points are listed row by row (in-phase level major). Position `k` in
    /// either list carries the Gray label `k ^ (k >> 1)` along its axis.
    pub fn new(kind: ConstellationKind, order: usize) -> Result<Self> {
        let symbols = match kind {
            ConstellationKind::Psk => psk_points(order)?,
            ConstellationKind::Qam => qam_points(order)?,
        };
        let name = match kind {
            ConstellationKind::Psk => format!("psk{order}"),
            ConstellationKind::Qam => format!("qam{order}"),
        };
        let m = symbols.len();
        Self::with_priors(symbols, vec![1.0 / m as f64; m], name)
    }

    /// Arbitrary alphabet. Priors must be a probability vector and the
    /// average energy `Σ α_m |a_m|²` must be 1.
    pub fn with_priors(symbols: Vec<Complex64>, priors: Vec<f64>, name: impl Into<String>) -> Result<Self> {
        if symbols.len() < 2 {
            return Err(Error::Config("constellation needs at least two symbols".into()));
        }
        if priors.len() != symbols.len() {
            return Err(Error::Dimension { expected: symbols.len(), got: priors.len() });
        }
        let total: f64 = priors.iter().sum();
        if priors.iter().any(|p| !(*p >= 0.0)) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!("priors must be a probability vector (sum {total})")));
        }
        let norms_sq: Vec<f64> = symbols.iter().map(|a| a.norm_sqr()).collect();
        let energy: f64 = priors.iter().zip(&norms_sq).map(|(p, e)| p * e).sum();
        if (energy - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!("average symbol energy must be 1, got {energy}")));
        }
        Ok(Self {
            norms: norms_sq.iter().map(|e| e.sqrt()).collect(),
            log_priors: priors.iter().map(|p| p.ln()).collect(),
            symbols,
            priors,
            norms_sq,
            name: name.into(),
        })
    }

    /// Parses names like `psk4`, `qam16`, `bpsk`, `qpsk`.
    pub fn from_name(name: &str) -> Result<Self> {
        let n = name.trim().to_ascii_lowercase();
        match n.as_str() {
            "bpsk" => return Self::new(ConstellationKind::Psk, 2),
            "qpsk" => return Self::new(ConstellationKind::Psk, 4),
            _ => {}
        }
        let (kind, rest) = if let Some(rest) = n.strip_prefix("psk") {
            (ConstellationKind::Psk, rest)
        } else if let Some(rest) = n.strip_prefix("qam") {
            (ConstellationKind::Qam, rest)
        } else {
            return Err(Error::Config(format!("unknown constellation '{name}'")));
        };
        let order = rest
            .trim_start_matches(':')
            .parse::<usize>()
            .map_err(|_| Error::Config(format!("bad constellation order in '{name}'")))?;
        Self::new(kind, order)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[Complex64] {
        &self.symbols
    }

    pub fn symbol(&self, m: usize) -> Complex64 {
        self.symbols[m]
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn log_priors(&self) -> &[f64] {
        &self.log_priors
    }

    /// `|a_m|²` per symbol.
    pub fn energies(&self) -> &[f64] {
        &self.norms_sq
    }

    /// `|a_m|` per symbol.
    pub fn magnitudes(&self) -> &[f64] {
        &self.norms
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn average_energy(&self) -> f64 {
        self.priors.iter().zip(&self.norms_sq).map(|(p, e)| p * e).sum()
    }

    /// Soft symbol estimate `Σ_m p_m a_m`.
    pub fn soft_symbol(&self, probs: &[f64]) -> Complex64 {
        self.symbols
            .iter()
            .zip(probs)
            .fold(Complex64::new(0.0, 0.0), |acc, (a, p)| acc + *a * *p)
    }

    /// Gray label of symbol `m`.
    pub fn gray_label(&self, m: usize) -> usize {
        let side = (self.len() as f64).sqrt().round() as usize;
        if self.name.starts_with("qam") && side * side == self.len() {
            let (i, q) = (m / side, m % side);
            (gray(i) * side) + gray(q)
        } else {
            gray(m)
        }
    }
}

fn gray(k: usize) -> usize {
    k ^ (k >> 1)
}

fn psk_points(order: usize) -> Result<Vec<Complex64>> {
    if order < 2 {
        return Err(Error::Config(format!("PSK order must be >= 2, got {order}")));
    }
    if order == 2 {
        return Ok(vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]);
    }
    let m = order as f64;
    if order.is_multiple_of(4) {
        // mirror about the diagonal so the quadrant is exactly symmetric
        let q = order / 4;
        let quarter: Vec<Complex64> = (0..q)
            .map(|k| {
                let mirror = q - 1 - k;
                if k == mirror {
                    Complex64::new(std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2)
                } else if k < mirror {
                    Complex64::from_polar(1.0, (2.0 * k as f64 + 1.0) * PI / m)
                } else {
                    let t = Complex64::from_polar(1.0, (2.0 * mirror as f64 + 1.0) * PI / m);
                    Complex64::new(t.im, t.re)
                }
            })
            .collect();
        let j = Complex64::new(0.0, 1.0);
        let mut out = Vec::with_capacity(order);
        let mut rot = Complex64::new(1.0, 0.0);
        for _ in 0..4 {
            out.extend(quarter.iter().map(|q| *q * rot));
            rot *= j;
        }
        Ok(out)
    } else {
        Ok((0..order)
            .map(|k| Complex64::from_polar(1.0, (2.0 * k as f64 + 1.0) * PI / m))
            .collect())
    }
}

fn qam_points(order: usize) -> Result<Vec<Complex64>> {
    let side = (order as f64).sqrt().round() as usize;
    if order < 4 || side * side != order {
        return Err(Error::Config(format!("QAM order must be a perfect square >= 4, got {order}")));
    }
    // odd levels ±1, ±3, ... have mean energy 2(L²-1)/3 per point
    let scale = 1.0 / (2.0 * ((side * side - 1) as f64) / 3.0).sqrt();
    let level = |k: usize| (2.0 * k as f64 - (side as f64 - 1.0)) * scale;
    let mut out = Vec::with_capacity(order);
    for i in 0..side {
        for q in 0..side {
            out.push(Complex64::new(level(i), level(q)));
        }
    }
    Ok(out)
}

/// Known modulation vector `g_k = s_k e^{jωk}`, `k = 1..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseVector {
    samples: Vec<f64>,
    omega: f64,
    g: Vec<Complex64>,
    energy: f64,
}

impl PulseVector {
    pub fn new(samples: Vec<f64>, omega: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Config("pulse needs at least one sample".into()));
        }
        if samples.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(Error::Config("pulse samples must be positive and finite".into()));
        }
        if !omega.is_finite() {
            return Err(Error::Config("carrier frequency must be finite".into()));
        }
        let g = samples
            .iter()
            .enumerate()
            .map(|(k, s)| Complex64::from_polar(*s, omega * (k + 1) as f64))
            .collect();
        let energy = samples.iter().map(|s| s * s).sum();
        Ok(Self { samples, omega, g, energy })
    }

    /// Simulation default: four unit samples on a quarter-rate carrier.
    pub fn default_simulation() -> Self {
        Self::new(vec![1.0; 4], PI / 2.0).expect("valid default pulse")
    }

    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn g(&self) -> &[Complex64] {
        &self.g
    }

    /// `||g||² = Σ s_k²`.
    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Matched-filter output `g^H x`.
    pub fn correlate(&self, x: &[Complex64]) -> Result<Complex64> {
        if x.len() != self.g.len() {
            return Err(Error::Dimension { expected: self.g.len(), got: x.len() });
        }
        Ok(self.g.iter().zip(x).map(|(g, x)| g.conj() * x).sum())
    }

    /// The same statistic written as a DTFT of the pulse-weighted samples,
    /// `Σ s_k x_k e^{-jωk}`, evaluated without touching `g`.
    pub fn dtft_statistic(&self, x: &[Complex64]) -> Result<Complex64> {
        if x.len() != self.samples.len() {
            return Err(Error::Dimension { expected: self.samples.len(), got: x.len() });
        }
        Ok(self
            .samples
            .iter()
            .zip(x)
            .enumerate()
            .map(|(k, (s, x))| x * Complex64::from_polar(*s, -self.omega * (k + 1) as f64))
            .sum())
    }
}

/// Per-sample complex noise variance for a given SNR in dB:
/// `r = E_s · (||g||²/n) / 10^{snr/10}`.
pub fn snr_to_noise_variance(snr_db: f64, c: &Constellation, p: &PulseVector) -> f64 {
    c.average_energy() * (p.energy() / p.len() as f64) / 10f64.powf(snr_db / 10.0)
}

/// True channel state for one batch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    phi: f64,
    r: f64,
    snr_db: Option<f64>,
}

impl ChannelParams {
    pub fn new(phi: f64, r: f64) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Domain(format!("noise variance must be positive, got {r}")));
        }
        if !phi.is_finite() {
            return Err(Error::Domain(format!("phase must be finite, got {phi}")));
        }
        Ok(Self { phi: principal_angle(phi), r, snr_db: None })
    }

    pub fn from_snr(phi: f64, snr_db: f64, c: &Constellation, p: &PulseVector) -> Result<Self> {
        let mut ch = Self::new(phi, snr_to_noise_variance(snr_db, c, p))?;
        ch.snr_db = Some(snr_db);
        Ok(ch)
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn snr_db(&self) -> Option<f64> {
        self.snr_db
    }
}

/// Index of the active constellation symbol in one period (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(pub usize);

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Known symbols inserted at fixed positions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PilotSpec {
    pilots: BTreeMap<usize, Label>,
}

impl PilotSpec {
    pub fn none() -> Self {
        Self::default()
    }

    /// `count` copies of `symbol` at positions `0..count`.
    pub fn leading(count: usize, symbol: Label) -> Self {
        Self { pilots: (0..count).map(|i| (i, symbol)).collect() }
    }

    pub fn insert(&mut self, position: usize, symbol: Label) {
        self.pilots.insert(position, symbol);
    }

    pub fn get(&self, position: usize) -> Option<Label> {
        self.pilots.get(&position).copied()
    }

    pub fn len(&self) -> usize {
        self.pilots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pilots.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Label)> + '_ {
        self.pilots.iter().map(|(p, l)| (*p, *l))
    }
}

/// Observed periods `x_1..x_K` with simulation truth and pilot positions.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    observations: Vec<Vec<Complex64>>,
    truth: Vec<Label>,
    pilots: PilotSpec,
}

impl Batch {
    /// Builds a batch from stored observations. `truth` may be empty when the
    /// transmitted symbols are unknown.
    pub fn new(observations: Vec<Vec<Complex64>>, truth: Vec<Label>, pilots: PilotSpec) -> Result<Self> {
        if let Some(first) = observations.first() {
            let n = first.len();
            if let Some(bad) = observations.iter().find(|row| row.len() != n) {
                return Err(Error::Dimension { expected: n, got: bad.len() });
            }
        }
        if !truth.is_empty() && truth.len() != observations.len() {
            return Err(Error::Dimension { expected: observations.len(), got: truth.len() });
        }
        if let Some((pos, _)) = pilots.iter().find(|(p, _)| *p >= observations.len()) {
            return Err(Error::Config(format!("pilot position {pos} outside batch of {}", observations.len())));
        }
        Ok(Self { observations, truth, pilots })
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn observations(&self) -> &[Vec<Complex64>] {
        &self.observations
    }

    pub fn observation(&self, i: usize) -> &[Complex64] {
        &self.observations[i]
    }

    pub fn truth(&self) -> &[Label] {
        &self.truth
    }

    pub fn pilots(&self) -> &PilotSpec {
        &self.pilots
    }

    pub fn is_pilot(&self, i: usize) -> bool {
        self.pilots.get(i).is_some()
    }

    /// Log prior over symbols at position `i`: the constellation priors, or
    /// an indicator on the pilot symbol.
    pub fn log_prior(&self, i: usize, c: &Constellation) -> Vec<f64> {
        match self.pilots.get(i) {
            Some(Label(m)) => (0..c.len()).map(|k| if k == m { 0.0 } else { f64::NEG_INFINITY }).collect(),
            None => c.log_priors().to_vec(),
        }
    }

    /// Places `front` ahead of `self`, shifting this batch's pilot positions.
    pub fn prepend(front: Batch, back: Batch) -> Result<Batch> {
        let offset = front.len();
        let mut pilots = front.pilots.clone();
        for (p, l) in back.pilots.iter() {
            pilots.insert(p + offset, l);
        }
        let mut truth = front.truth;
        truth.extend(back.truth);
        let mut observations = front.observations;
        observations.extend(back.observations);
        Batch::new(observations, truth, pilots)
    }
}

/// Draws a batch of `k` periods. Labels come from the priors except at pilot
/// positions. Each row is `(a_m g + w) e^{jφ}`; the noise is circular, so the
/// rotation does not change its law, and the same random stream produces
/// rows that differ only by the phase factor when `φ` changes.
pub fn transmit<R: Rng + ?Sized>(
    c: &Constellation,
    p: &PulseVector,
    ch: &ChannelParams,
    k: usize,
    pilots: &PilotSpec,
    rng: &mut R,
) -> Result<Batch> {
    let rot = Complex64::from_polar(1.0, ch.phi());
    let sigma = (ch.r() / 2.0).sqrt();
    let mut observations = Vec::with_capacity(k);
    let mut truth = Vec::with_capacity(k);
    for i in 0..k {
        let label = match pilots.get(i) {
            Some(l) => l,
            None => Label(draw_label(c.priors(), rng)),
        };
        let a = c.symbol(label.0);
        let row = p
            .g()
            .iter()
            .map(|g| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                (a * g + Complex64::new(sigma * re, sigma * im)) * rot
            })
            .collect();
        observations.push(row);
        truth.push(label);
    }
    Batch::new(observations, truth, pilots.clone())
}

fn draw_label<R: Rng + ?Sized>(priors: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (m, p) in priors.iter().enumerate() {
        acc += p;
        if u < acc {
            return m;
        }
    }
    // rounding left u above the final partial sum; take the last positive prior
    priors.iter().rposition(|p| *p > 0.0).unwrap_or(0)
}
