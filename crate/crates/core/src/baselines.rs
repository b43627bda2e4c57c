//! Reference decoders from the turbo-synchronization literature, written as
//! parameterizations of [`vb_offline`].

use crate::decode_vb::{vb_offline, VbConfig, VbState};
use crate::dirstat::VonMises;
use crate::sigmodel::{Batch, Constellation, PulseVector};
use crate::Result;

/// EM turbo synchronization: a flat phase prior and a point phase estimate
/// `∠κ` in the symbol update (Bessel ratio forced to 1). `|κ|` is still
/// reported. The ELBO trace is empty.
pub fn em_turbo_sync(b: &Batch, c: &Constellation, p: &PulseVector, r: f64, cfg: &VbConfig) -> Result<VbState> {
    let cfg = VbConfig { ratio_override: Some(1.0), ..*cfg };
    vb_offline(b, c, p, &VonMises::uniform(), r, &cfg)
}

/// Variational decoding with a uniform phase prior (`κ0 = 0`).
pub fn vb_uniform_prior(b: &Batch, c: &Constellation, p: &PulseVector, r: f64, cfg: &VbConfig) -> Result<VbState> {
    let cfg = VbConfig { ratio_override: None, ..*cfg };
    vb_offline(b, c, p, &VonMises::uniform(), r, &cfg)
}
