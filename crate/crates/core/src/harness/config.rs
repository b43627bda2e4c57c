//! Flat `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Recognized keys:
//!
//! ```text
//! snr_db_list           = -15,-13,-11
//! trials_per_point      = 5000
//! batch_size            = 20
//! pilot_count           = 5
//! pilot_count_<decoder> = 0          # per-decoder override
//! pilot_symbol          = 0
//! constellation         = psk4       # psk<M>, qam<M>, bpsk, qpsk
//! pulse_samples         = 1,1,1,1
//! pulse_omega           = 1.5707963267948966
//! prior_kappa_mag       = 100
//! prior_kappa_angle_rad = 0.5
//! true_phase_mode       = fixed      # or uniform
//! true_phase_rad        = 0.5
//! seed                  = 20110623
//! decoders              = independent,vb_offline,vb_online,em,vb_uniform
//! max_iterations        = 100
//! tolerance             = 1e-8
//! noise_variance        = 0.5        # decode command only
//! record_timing         = false
//! ```
//!
//! Keys not present keep their [`SweepConfig::default`] values.

use std::str::FromStr;

use super::{DecoderId, SweepConfig};
use crate::dirstat::VonMises;
use crate::sigmodel::{Constellation, Label, PulseVector};
use crate::{Error, Result};

/// How the true channel phase is chosen per trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TruePhase {
    Fixed(f64),
    Uniform,
}

fn parse_value<T: FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse::<T>().map_err(|_| Error::Parse { line, msg: format!("bad value '{v}' for '{key}'") })
}

fn parse_list<T: FromStr>(line: usize, key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse_value(line, key, s.trim())).collect()
}

/// Parses a configuration file body.
pub fn parse_config(text: &str) -> Result<SweepConfig> {
    let mut cfg = SweepConfig::default();
    let mut kappa_mag = cfg.prior.concentration();
    let mut kappa_angle = crate::dirstat::arg(cfg.prior.kappa());
    let mut phase_mode: Option<String> = None;
    let mut phase_value: Option<f64> = None;
    let mut samples: Option<Vec<f64>> = None;
    let mut omega: Option<f64> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| Error::Parse { line, msg: format!("expected 'key = value', got '{body}'") })?;
        let key = key.trim();
        let value = value.trim();
        match key {
            "snr_db_list" => cfg.snr_db_list = parse_list(line, key, value)?,
            "trials_per_point" => cfg.trials_per_point = parse_value(line, key, value)?,
            "batch_size" => cfg.batch_size = parse_value(line, key, value)?,
            "pilot_count" => cfg.pilot_count = parse_value(line, key, value)?,
            "pilot_symbol" => cfg.pilot_symbol = Label(parse_value(line, key, value)?),
            "constellation" => cfg.constellation = Constellation::from_name(value)?,
            "pulse_samples" => samples = Some(parse_list(line, key, value)?),
            "pulse_omega" => omega = Some(parse_value(line, key, value)?),
            "prior_kappa_mag" => kappa_mag = parse_value(line, key, value)?,
            "prior_kappa_angle_rad" => kappa_angle = parse_value(line, key, value)?,
            "true_phase_mode" => phase_mode = Some(value.to_ascii_lowercase()),
            "true_phase_rad" => phase_value = Some(parse_value(line, key, value)?),
            "seed" => cfg.seed = parse_value(line, key, value)?,
            "decoders" => cfg.decoders = parse_list(line, key, value)?,
            "max_iterations" => cfg.vb.max_iterations = parse_value(line, key, value)?,
            "tolerance" => cfg.vb.tolerance = parse_value(line, key, value)?,
            "noise_variance" => cfg.noise_variance = Some(parse_value(line, key, value)?),
            "record_timing" => cfg.record_timing = parse_value(line, key, value)?,
            other => match other.strip_prefix("pilot_count_") {
                Some(d) => {
                    let decoder: DecoderId = d.parse()?;
                    cfg.pilot_overrides.insert(decoder, parse_value(line, key, value)?);
                }
                None => return Err(Error::Parse { line, msg: format!("unknown key '{other}'") }),
            },
        }
    }

    cfg.prior = VonMises::from_polar(kappa_mag, kappa_angle)?;
    if samples.is_some() || omega.is_some() {
        cfg.pulse = PulseVector::new(
            samples.unwrap_or_else(|| cfg.pulse.samples().to_vec()),
            omega.unwrap_or_else(|| cfg.pulse.omega()),
        )?;
    }
    cfg.true_phase = match phase_mode.as_deref() {
        None | Some("fixed") => match (phase_value, cfg.true_phase) {
            (Some(v), _) => TruePhase::Fixed(v),
            (None, TruePhase::Fixed(v)) => TruePhase::Fixed(v),
            (None, TruePhase::Uniform) => TruePhase::Uniform,
        },
        Some("uniform") => TruePhase::Uniform,
        Some(other) => return Err(Error::Config(format!("unknown true_phase_mode '{other}'"))),
    };
    cfg.validate()?;
    Ok(cfg)
}
