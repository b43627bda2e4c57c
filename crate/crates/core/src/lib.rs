//! Bayesian symbol and phase inference for a digital receiver whose carrier
//! phase is unknown.
//!
//! The received period `x_i = a_{m_i} g e^{jφ} + w_i` is decoded under a von
//! Mises prior on the constant phase `φ`. The crate provides
//!
//! * [`dirstat`]: von Mises distribution, log-domain Bessel kernels, sampling;
//! * [`sigmodel`]: constellations, pulse/carrier vector, AWGN channel;
//! * [`decode_exact`]: exact single-period posterior and independent decoding;
//! * [`decode_vb`]: offline (iterative) and online (conflating) variational decoders;
//! * [`baselines`]: EM turbo synchronization and uniform-prior VB;
//! * [`harness`]: seeded Monte Carlo sweeps, CSV/SVG reports, config parsing.
//!
//! With the default `parallel` feature, sweeps run trials on a rayon pool.
//! Results do not depend on the execution mode.

// `!(x > 0.0)` is used on purpose so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod decode_exact;
pub mod decode_vb;
pub mod dirstat;
pub mod error;
pub mod harness;
pub mod sigmodel;

pub use error::{Error, Result};
pub use num_complex::Complex64;
