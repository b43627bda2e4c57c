mod common;

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vbsync::decode_exact::{component_angles, decode_independent, map_symbol, posterior_single, SymbolPosterior};
use vbsync::dirstat::VonMises;
use vbsync::sigmodel::{transmit, ChannelParams, Constellation, ConstellationKind, Label, PilotSpec, PulseVector};

fn qpsk() -> Constellation {
    Constellation::new(ConstellationKind::Psk, 4).unwrap()
}

fn qam16() -> Constellation {
    Constellation::new(ConstellationKind::Qam, 16).unwrap()
}

fn noiseless(c: &Constellation, m: usize, p: &PulseVector, phi: f64) -> Vec<Complex64> {
    let rot = Complex64::from_polar(1.0, phi);
    p.g().iter().map(|g| c.symbol(m) * g * rot).collect()
}

#[test]
fn uniform_prior_gives_uniform_qpsk_posterior() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let p = PulseVector::default_simulation();
    for _ in 0..20 {
        let x: Vec<Complex64> = (0..4).map(|_| Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))).collect();
        let (sp, _) = posterior_single(&x, &qpsk(), &p, &VonMises::uniform(), 0.8).unwrap();
        assert!(sp.probs().iter().all(|q| *q == 0.25), "{:?}", sp.probs());
    }
}

#[test]
fn weak_prior_noiseless_map_agrees_with_importance_sampling() {
    let c = qpsk();
    let p = PulseVector::default_simulation();
    let prior = VonMises::from_polar(5.0, 0.0).unwrap();
    let x = noiseless(&c, 0, &p, 0.0);
    let r = 1.0;
    let (sp, _) = posterior_single(&x, &c, &p, &prior, r).unwrap();
    assert_eq!(sp.map(), Label(0));

    // uniform proposal over φ; weight f(x|φ,m) f(φ|κ0) · 2π
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let phis: Vec<f64> = (0..1_000_000).map(|_| rng.random_range(-PI..PI)).collect();
    let logs: Vec<f64> = (0..c.len())
        .map(|m| {
            let w: Vec<f64> = phis
                .iter()
                .map(|phi| common::log_prior_density(prior.kappa(), *phi) + common::log_likelihood(&x, c.symbol(m), &p, *phi, r))
                .collect();
            c.priors()[m].ln() + common::ln_sum_exp(&w)
        })
        .collect();
    let z = common::ln_sum_exp(&logs);
    let is: Vec<f64> = logs.iter().map(|l| (l - z).exp()).collect();
    let is_map = (0..is.len()).fold(0, |best, m| if is[m] > is[best] { m } else { best });
    assert_eq!(is_map, 0);
    assert!(common::total_variation(sp.probs(), &is) < 1e-2, "{:?} vs {is:?}", sp.probs());
}

#[test]
fn zero_observation_uses_energy_term_only() {
    let c = qam16();
    let p = PulseVector::default_simulation();
    let r = 0.6;
    let x = vec![Complex64::new(0.0, 0.0); 4];
    let weights: Vec<f64> = (0..16).map(|m| c.priors()[m] * (-c.symbol(m).norm_sqr() * p.energy() / r).exp()).collect();
    let total: f64 = weights.iter().sum();
    for mag in [0.0, 3.0, 40.0] {
        let prior = VonMises::from_polar(mag, 1.0).unwrap();
        let (sp, mix) = posterior_single(&x, &c, &p, &prior, r).unwrap();
        for (got, w) in sp.probs().iter().zip(&weights) {
            assert!((got - w / total).abs() < 1e-14);
        }
        assert!(mix.components().iter().all(|k| k.kappa() == prior.kappa()));
    }
}

#[test]
fn map_tie_break() {
    let post = |v: Vec<f64>| SymbolPosterior::from_log_weights(v.iter().map(|p: &f64| p.ln()).collect());
    assert_eq!(map_symbol(&post(vec![0.7, 0.1, 0.1, 0.1])), Label(0));
    assert_eq!(map_symbol(&post(vec![0.25; 4])), Label(0));
    assert_eq!(map_symbol(&post(vec![0.1, 0.8, 0.1])), Label(1));
}

#[test]
fn independent_noiseless_batch() {
    let c = qpsk();
    let p = PulseVector::default_simulation();
    let phi = -2.0;
    let prior = VonMises::from_polar(20.0, phi).unwrap();
    let ch = ChannelParams::new(phi, 1e-30).unwrap();
    let b = transmit(&c, &p, &ch, 3, &PilotSpec::none(), &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
    let posts = decode_independent(&b, &c, &p, &prior, 1e-2).unwrap();
    let maps: Vec<Label> = posts.iter().map(map_symbol).collect();
    assert_eq!(maps, b.truth());

    let empty = transmit(&c, &p, &ch, 0, &PilotSpec::none(), &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
    assert!(decode_independent(&empty, &c, &p, &prior, 1.0).unwrap().is_empty());

    let all = PilotSpec::leading(4, Label(2));
    let b = transmit(&c, &p, &ChannelParams::new(0.0, 1.0).unwrap(), 4, &all, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
    for sp in decode_independent(&b, &c, &p, &VonMises::uniform(), 1.0).unwrap() {
        assert_eq!(sp.probs(), &[0.0, 0.0, 1.0, 0.0]);
    }
}

#[test]
fn statistic_matches_dtft_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let c = qam16();
    for n in 1..6 {
        let s: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..2.0)).collect();
        let p = PulseVector::new(s.clone(), rng.random_range(-PI..PI)).unwrap();
        let omega = p.omega();
        let x: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let prior = VonMises::from_polar(2.0, 0.3).unwrap();
        let r = 0.4;
        let (_, mix) = posterior_single(&x, &c, &p, &prior, r).unwrap();
        // written out directly from the samples
        let dtft: Complex64 = (0..n).map(|k| x[k] * s[k] * Complex64::from_polar(1.0, -omega * (k + 1) as f64)).sum();
        for (m, comp) in mix.components().iter().enumerate() {
            let want = c.symbol(m).conj() * dtft * (2.0 / r);
            let got = comp.kappa() - prior.kappa();
            assert!((got - want).norm() <= 1e-12 * want.norm().max(1.0), "m={m}: {got} vs {want}");
        }
    }
}

#[test]
fn same_radius_symbols_tie_without_prior() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let c = qam16();
    let p = PulseVector::default_simulation();
    for _ in 0..50 {
        let x: Vec<Complex64> = (0..4).map(|_| Complex64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0))).collect();
        let (sp, _) = posterior_single(&x, &c, &p, &VonMises::uniform(), rng.random_range(0.1..3.0)).unwrap();
        for a in 0..16 {
            for b in 0..16 {
                if (c.magnitudes()[a] - c.magnitudes()[b]).abs() < 1e-12 {
                    let (pa, pb) = (sp.probs()[a], sp.probs()[b]);
                    assert!((pa - pb).abs() <= 1e-12 * pa.max(pb), "{a} vs {b}: {pa} {pb}");
                }
            }
        }
    }
}

#[test]
fn prior_breaks_same_radius_ties() {
    let p = PulseVector::default_simulation();
    for c in [qpsk(), qam16()] {
        for m in [0, c.len() - 1] {
            let angle = 0.8;
            let prior = VonMises::from_polar(0.5, angle).unwrap();
            let x = noiseless(&c, m, &p, angle);
            let (sp, _) = posterior_single(&x, &c, &p, &prior, 0.5).unwrap();
            for other in 0..c.len() {
                if other != m && (c.magnitudes()[other] - c.magnitudes()[m]).abs() < 1e-12 {
                    assert!(sp.probs()[m] > sp.probs()[other]);
                }
            }
        }
    }
}

#[test]
fn mixture_mirrors_posterior() {
    let c = qam16();
    let p = PulseVector::default_simulation();
    let prior = VonMises::from_polar(1.5, -0.4).unwrap();
    let x = noiseless(&c, 5, &p, 0.2);
    let (sp, mix) = posterior_single(&x, &c, &p, &prior, 0.9).unwrap();
    assert_eq!(mix.weights(), sp.probs());
    let y = p.correlate(&x).unwrap();
    for (m, angle) in component_angles(&mix).iter().enumerate() {
        let k = prior.kappa() + c.symbol(m).conj() * y * (2.0 / 0.9);
        assert!((angle - k.arg()).abs() < 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn matches_quadrature(
        order in prop::sample::select(vec![2usize, 4]),
        n in 1usize..=4,
        seed in any::<u64>(),
        mag in 0.0f64..8.0,
        r in 0.2f64..4.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = Constellation::new(ConstellationKind::Psk, order).unwrap();
        let s = (0..n).map(|_| rng.random_range(0.3..1.5)).collect();
        let p = PulseVector::new(s, rng.random_range(-PI..PI)).unwrap();
        let prior = VonMises::from_polar(mag, rng.random_range(-PI..PI)).unwrap();
        let x: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5))).collect();
        let (sp, _) = posterior_single(&x, &c, &p, &prior, r).unwrap();
        let q = common::quadrature_posterior(&x, &c, &p, prior.kappa(), r, 20_000);
        prop_assert!(common::total_variation(sp.probs(), &q) < 1e-6);
        prop_assert!((sp.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
