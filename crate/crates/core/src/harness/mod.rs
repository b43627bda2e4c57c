//! Seeded Monte Carlo experiments over SNR and decoder.
//!
//! Every trial owns its random streams. A stream is a ChaCha8 generator whose
//! 256-bit key is the tuple `(seed, snr, trial, purpose)` itself, so a trial's
//! draws do not depend on which worker runs it or in what order. The data
//! periods and the pilot periods come from separate streams, which means all
//! decoders at one `(snr, trial)` see the same data symbols and noise whatever
//! their pilot count.

mod config;
mod iq;
mod report;

pub use config::{parse_config, TruePhase};
pub use iq::{parse_iq, read_iq};
pub use report::{parse_csv, render_plot, render_svg, to_csv_string, write_csv};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::baselines::{em_turbo_sync, vb_uniform_prior};
use crate::decode_exact::{decode_independent, SymbolPosterior};
use crate::decode_vb::{decode_online, vb_offline, VbConfig, VbStatus};
use crate::dirstat::VonMises;
use crate::sigmodel::{
    snr_to_noise_variance, transmit, Batch, ChannelParams, Constellation, ConstellationKind, Label, PilotSpec,
    PulseVector,
};
use crate::{Error, Result};

/// The five decoders compared by a sweep. Ordering follows the identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DecoderId {
    Em,
    Independent,
    VbOffline,
    VbOnline,
    VbUniform,
}

impl DecoderId {
    pub const ALL: [DecoderId; 5] =
        [DecoderId::Independent, DecoderId::VbOffline, DecoderId::VbOnline, DecoderId::Em, DecoderId::VbUniform];

    pub fn as_str(&self) -> &'static str {
        match self {
            DecoderId::Em => "em",
            DecoderId::Independent => "independent",
            DecoderId::VbOffline => "vb_offline",
            DecoderId::VbOnline => "vb_online",
            DecoderId::VbUniform => "vb_uniform",
        }
    }

    /// The literature baselines, which receive pilots by default.
    pub fn is_baseline(&self) -> bool {
        matches!(self, DecoderId::Em | DecoderId::VbUniform)
    }
}

impl fmt::Display for DecoderId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DecoderId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "em" => Ok(DecoderId::Em),
            "independent" => Ok(DecoderId::Independent),
            "vb_offline" => Ok(DecoderId::VbOffline),
            "vb_online" => Ok(DecoderId::VbOnline),
            "vb_uniform" => Ok(DecoderId::VbUniform),
            other => Err(Error::Config(format!("unknown decoder '{other}'"))),
        }
    }
}

/// Experiment protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub snr_db_list: Vec<f64>,
    pub trials_per_point: usize,
    /// Data periods per batch; pilots are added in front.
    pub batch_size: usize,
    /// Pilot count for the baselines.
    pub pilot_count: usize,
    /// Per-decoder pilot counts that replace the default rule.
    pub pilot_overrides: BTreeMap<DecoderId, usize>,
    pub pilot_symbol: Label,
    pub constellation: Constellation,
    pub pulse: PulseVector,
    pub prior: VonMises,
    pub true_phase: TruePhase,
    pub seed: u64,
    pub decoders: Vec<DecoderId>,
    pub vb: VbConfig,
    /// Noise variance for the `decode` command; derived from the first SNR
    /// when absent.
    pub noise_variance: Option<f64>,
    /// Measure wall time per batch. Off by default so reports are
    /// byte-reproducible.
    pub record_timing: bool,
}

impl Default for SweepConfig {
    /// QPSK, 20 data periods, 5 baseline pilots, −15…5 dB in 2 dB steps,
    /// 5000 trials per point, prior `|κ0| = 100` centred on a fixed true
    /// phase of 0.5 rad.
    fn default() -> Self {
        Self {
            snr_db_list: (0..11).map(|k| -15.0 + 2.0 * k as f64).collect(),
            trials_per_point: 5000,
            batch_size: 20,
            pilot_count: 5,
            pilot_overrides: BTreeMap::new(),
            pilot_symbol: Label(0),
            constellation: Constellation::new(ConstellationKind::Psk, 4).expect("qpsk"),
            pulse: PulseVector::default_simulation(),
            prior: VonMises::from_polar(DEFAULT_PRIOR_MAG, DEFAULT_PHASE).expect("finite prior"),
            true_phase: TruePhase::Fixed(DEFAULT_PHASE),
            seed: 20110623,
            decoders: DecoderId::ALL.to_vec(),
            vb: VbConfig::default(),
            noise_variance: None,
            record_timing: false,
        }
    }
}

const DEFAULT_PRIOR_MAG: f64 = 100.0;
const DEFAULT_PHASE: f64 = 0.5;

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials_per_point < 1 {
            return Err(Error::Config("trials_per_point must be >= 1".into()));
        }
        if self.batch_size < 1 {
            return Err(Error::Config("batch_size must be >= 1".into()));
        }
        if self.decoders.is_empty() {
            return Err(Error::Config("at least one decoder is required".into()));
        }
        if self.snr_db_list.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("SNR values must be finite".into()));
        }
        if self.pilot_symbol.0 >= self.constellation.len() {
            return Err(Error::Config(format!("pilot symbol {} outside constellation", self.pilot_symbol)));
        }
        if let TruePhase::Fixed(phi) = self.true_phase {
            if !phi.is_finite() {
                return Err(Error::Config("true phase must be finite".into()));
            }
        }
        if let Some(r) = self.noise_variance {
            if !(r > 0.0) || !r.is_finite() {
                return Err(Error::Config(format!("noise_variance must be positive, got {r}")));
            }
        }
        self.vb.validate()
    }

    /// Pilots given to `decoder`: its override, else `pilot_count` for the
    /// baselines and none for the Bayesian decoders.
    pub fn pilots_for(&self, decoder: DecoderId) -> usize {
        match self.pilot_overrides.get(&decoder) {
            Some(n) => *n,
            None if decoder.is_baseline() => self.pilot_count,
            None => 0,
        }
    }

    pub fn noise_variance_at(&self, snr_db: f64) -> f64 {
        snr_to_noise_variance(snr_db, &self.constellation, &self.pulse)
    }
}

/// Decoder output normalized across the five algorithms.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub posteriors: Vec<SymbolPosterior>,
    /// Final phase parameter (the fixed prior for independent decoding).
    pub kappa: Complex64,
    pub iterations: usize,
    pub status: Option<VbStatus>,
}

/// Runs one decoder on a batch.
pub fn decode_batch(decoder: DecoderId, b: &Batch, cfg: &SweepConfig, r: f64) -> Result<Decoded> {
    let c = &cfg.constellation;
    let p = &cfg.pulse;
    let from_state = |st: crate::decode_vb::VbState| Decoded {
        kappa: st.kappa.kappa(),
        iterations: st.iteration,
        status: Some(st.status),
        posteriors: st.symbol_posteriors,
    };
    Ok(match decoder {
        DecoderId::Independent => Decoded {
            posteriors: decode_independent(b, c, p, &cfg.prior, r)?,
            kappa: cfg.prior.kappa(),
            iterations: 1,
            status: None,
        },
        DecoderId::VbOffline => from_state(vb_offline(b, c, p, &cfg.prior, r, &cfg.vb)?),
        DecoderId::VbOnline => {
            let out = decode_online(b, c, p, &cfg.prior, r)?;
            Decoded { kappa: out.state.kappa_hat, iterations: out.state.t, status: None, posteriors: out.symbol_posteriors }
        }
        DecoderId::Em => from_state(em_turbo_sync(b, c, p, r, &cfg.vb)?),
        DecoderId::VbUniform => from_state(vb_uniform_prior(b, c, p, r, &cfg.vb)?),
    })
}

#[derive(Debug, Clone, Copy)]
#[repr(u64)]
enum Stream {
    Phase = 0,
    Data = 1,
    Pilot = 2,
}

/// Counter-keyed generator for one `(seed, snr, trial, purpose)` tuple.
fn stream(seed: u64, snr_db: f64, trial: u64, purpose: Stream) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&snr_db.to_bits().to_le_bytes());
    key[16..24].copy_from_slice(&trial.to_le_bytes());
    key[24..].copy_from_slice(&(purpose as u64).to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Everything one trial produced, for debugging dumps.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport {
    pub decoder: DecoderId,
    pub snr_db: f64,
    pub noise_variance: f64,
    pub true_phase: f64,
    pub batch: Batch,
    /// `None` when the decoder returned an error.
    pub decoded: Option<Decoded>,
    pub error: Option<String>,
    /// Correctness of each non-pilot period.
    pub correct: Vec<bool>,
}

/// Per-symbol correctness of one trial, plus the decoder status.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialOutcome {
    pub correct: Vec<bool>,
    pub converged: bool,
    pub failed: bool,
}

/// Draws the trial's channel at `snr_db`, transmits pilots and data, and
/// decodes with `decoder`.
pub fn run_trial_detailed(cfg: &SweepConfig, snr_db: f64, decoder: DecoderId, trial: u64) -> Result<TrialReport> {
    let c = &cfg.constellation;
    let p = &cfg.pulse;
    let true_phase = match cfg.true_phase {
        TruePhase::Fixed(phi) => phi,
        TruePhase::Uniform => VonMises::uniform().sample(&mut stream(cfg.seed, snr_db, trial, Stream::Phase)),
    };
    let ch = ChannelParams::from_snr(true_phase, snr_db, c, p)?;
    let r = ch.r();

    let data = transmit(c, p, &ch, cfg.batch_size, &PilotSpec::none(), &mut stream(cfg.seed, snr_db, trial, Stream::Data))?;
    let n_pilots = cfg.pilots_for(decoder);
    let batch = if n_pilots > 0 {
        let pilots = PilotSpec::leading(n_pilots, cfg.pilot_symbol);
        let front = transmit(c, p, &ch, n_pilots, &pilots, &mut stream(cfg.seed, snr_db, trial, Stream::Pilot))?;
        Batch::prepend(front, data)?
    } else {
        data
    };

    let (decoded, error) = match decode_batch(decoder, &batch, cfg, r) {
        Ok(d) => (Some(d), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let correct = (0..batch.len())
        .filter(|i| !batch.is_pilot(*i))
        .map(|i| match &decoded {
            Some(d) => d.posteriors[i].map() == batch.truth()[i],
            None => false,
        })
        .collect();
    Ok(TrialReport { decoder, snr_db, noise_variance: r, true_phase: ch.phi(), batch, decoded, error, correct })
}

/// Per-symbol correctness of trial `trial` at `snr_db` under `decoder`.
pub fn run_trial(cfg: &SweepConfig, snr_db: f64, decoder: DecoderId, trial: u64) -> Result<TrialOutcome> {
    let rep = run_trial_detailed(cfg, snr_db, decoder, trial)?;
    let converged = !matches!(rep.decoded.as_ref().and_then(|d| d.status), Some(VbStatus::MaxIterations));
    Ok(TrialOutcome { correct: rep.correct, converged, failed: rep.error.is_some() })
}

/// Aggregate of one `(decoder, snr)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub decoder: DecoderId,
    pub snr_db: f64,
    pub symbols: u64,
    pub successes: u64,
    /// Trials whose iterative decoder stopped at `max_iterations`.
    pub nonconverged: u64,
    /// Trials whose decoder returned an error.
    pub failures: u64,
    pub mean_time_ms: Option<f64>,
}

impl CellResult {
    pub fn success_rate(&self) -> f64 {
        if self.symbols == 0 {
            0.0
        } else {
            self.successes as f64 / self.symbols as f64
        }
    }

    /// Normal-approximation 95% half-width of the success rate.
    pub fn ci95(&self) -> f64 {
        if self.symbols == 0 {
            return 0.0;
        }
        let p = self.success_rate();
        1.96 * (p * (1.0 - p) / self.symbols as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    /// Sorted by `(decoder, snr_db)`.
    pub cells: Vec<CellResult>,
}

impl SweepResult {
    pub fn cell(&self, decoder: DecoderId, snr_db: f64) -> Option<&CellResult> {
        self.cells.iter().find(|c| c.decoder == decoder && c.snr_db == snr_db)
    }

    pub fn sort(&mut self) {
        self.cells.sort_by(|a, b| a.decoder.cmp(&b.decoder).then(a.snr_db.total_cmp(&b.snr_db)));
    }
}

/// How trials are scheduled. Output is identical in every mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    Sequential,
    /// Rayon pool; `None` uses the global pool. Without the `parallel`
    /// feature this runs sequentially.
    #[default]
    Parallel,
    ParallelWith(usize),
}

/// Runs every `(decoder, snr, trial)` in the configuration.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    run_sweep_with(cfg, ExecMode::default())
}

struct TaskResult {
    cell: usize,
    symbols: u64,
    successes: u64,
    nonconverged: u64,
    failed: u64,
    nanos: u128,
}

pub fn run_sweep_with(cfg: &SweepConfig, mode: ExecMode) -> Result<SweepResult> {
    cfg.validate()?;
    let mut decoders = cfg.decoders.clone();
    decoders.sort();
    decoders.dedup();
    let cells: Vec<(DecoderId, f64)> =
        decoders.iter().flat_map(|d| cfg.snr_db_list.iter().map(move |s| (*d, *s))).collect();
    let trials = cfg.trials_per_point;
    let total = cells.len() * trials;

    let task = |k: usize| -> Result<TaskResult> {
        let cell = k / trials;
        let trial = (k % trials) as u64;
        let (decoder, snr) = cells[cell];
        let start = cfg.record_timing.then(Instant::now);
        let out = run_trial(cfg, snr, decoder, trial)?;
        Ok(TaskResult {
            cell,
            symbols: out.correct.len() as u64,
            successes: out.correct.iter().filter(|c| **c).count() as u64,
            nonconverged: u64::from(!out.converged),
            failed: u64::from(out.failed),
            nanos: start.map(|s| s.elapsed().as_nanos()).unwrap_or(0),
        })
    };
    let results = map_tasks(mode, total, task)?;

    let mut agg: Vec<CellResult> = cells
        .iter()
        .map(|(d, s)| CellResult {
            decoder: *d,
            snr_db: *s,
            symbols: 0,
            successes: 0,
            nonconverged: 0,
            failures: 0,
            mean_time_ms: None,
        })
        .collect();
    let mut nanos = vec![0u128; cells.len()];
    for t in results {
        let c = &mut agg[t.cell];
        c.symbols += t.symbols;
        c.successes += t.successes;
        c.nonconverged += t.nonconverged;
        c.failures += t.failed;
        nanos[t.cell] += t.nanos;
    }
    if cfg.record_timing {
        for (c, ns) in agg.iter_mut().zip(nanos) {
            c.mean_time_ms = Some(ns as f64 / 1e6 / trials as f64);
        }
    }
    let mut res = SweepResult { cells: agg };
    res.sort();
    Ok(res)
}

fn map_tasks<F>(mode: ExecMode, total: usize, task: F) -> Result<Vec<TaskResult>>
where
    F: Fn(usize) -> Result<TaskResult> + Sync + Send,
{
    match mode {
        ExecMode::Sequential => (0..total).map(task).collect(),
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => {
            use rayon::prelude::*;
            (0..total).into_par_iter().map(task).collect()
        }
        #[cfg(feature = "parallel")]
        ExecMode::ParallelWith(workers) => {
            use rayon::prelude::*;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers.max(1))
                .build()
                .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
            pool.install(|| (0..total).into_par_iter().map(task).collect())
        }
        #[cfg(not(feature = "parallel"))]
        ExecMode::Parallel | ExecMode::ParallelWith(_) => (0..total).map(task).collect(),
    }
}
