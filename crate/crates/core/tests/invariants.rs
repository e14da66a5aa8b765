//! Property tests over randomly drawn states, parameters and sequences.

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use unsharp_core::analysis::{
    classify_regime, power_spectrum, process_readout, synthesize, synthesize_complex,
    truncate_series, wiener_filter, Regime, RegimeThresholds,
};
use unsharp_core::dynamics::{commutator_residual, evolve, propagator, HamiltonianSpec};
use unsharp_core::nseries::{fidelity, nseries_probability, sigma_g2};
use unsharp_core::{Outcome, PovmParams, StateVector};

fn state() -> impl Strategy<Value = StateVector> {
    (0.0..=PI, 0.0..2.0 * PI).prop_map(|(theta, phi)| StateVector::from_angles(theta, phi))
}

fn params() -> impl Strategy<Value = PovmParams> {
    (0.0..=1.0f64, 0.0..=1.0f64).prop_map(|(p1, p2)| PovmParams::new(p1, p2).unwrap())
}

/// Parameters with `|Δp|` bounded away from zero.
fn genuine_params() -> impl Strategy<Value = PovmParams> {
    params().prop_filter("nonzero dp", |p| p.dp().abs() > 1e-3)
}

fn outcome() -> impl Strategy<Value = Outcome> {
    prop_oneof![Just(Outcome::Plus), Just(Outcome::Minus)]
}

proptest! {
    #![proptest_config(ProptestConfig {
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn effects_complete(p in params()) {
        let (plus, minus) = p.operations();
        let (a1, a2) = plus.effect();
        let (b1, b2) = minus.effect();
        prop_assert!((a1 + b1 - 1.0).abs() <= 1e-12);
        prop_assert!((a2 + b2 - 1.0).abs() <= 1e-12);
        prop_assert!(plus.u1 >= 0.0 && plus.u2 >= 0.0 && minus.u1 >= 0.0 && minus.u2 >= 0.0);
    }

    #[test]
    fn p0_dp_round_trip(p0 in 0.0..=1.0f64, frac in -1.0..=1.0f64) {
        let dp = frac * 2.0 * p0.min(1.0 - p0);
        let p = PovmParams::from_p0_dp(p0, dp).unwrap();
        prop_assert!((p.p0() - p0).abs() < 1e-12);
        prop_assert!((p.dp() - dp).abs() < 1e-12);
    }

    #[test]
    fn outcome_probabilities_close(s in state(), p in params()) {
        let (pp, pm) = p.outcome_probabilities(&s).unwrap();
        prop_assert!((0.0..=1.0).contains(&pp) && (0.0..=1.0).contains(&pm));
        prop_assert!((pp + pm - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn measurement_preserves_relative_phase(s in state(), p in params(), o in outcome()) {
        let op = p.operation(o);
        prop_assume!(op.u1 > 1e-6 && op.u2 > 1e-6);
        prop_assume!(s.c1.norm() > 1e-6 && s.c2.norm() > 1e-6);
        let next = op.apply(&s, true).unwrap();
        prop_assert!((next.norm_sqr() - 1.0).abs() <= 1e-12);
        let before = s.coherence().arg();
        let after = next.coherence().arg();
        let diff = (after - before + PI).rem_euclid(2.0 * PI) - PI;
        prop_assert!(diff.abs() < 1e-9);
    }

    #[test]
    fn evolution_preserves_bloch_x(s in state(), tau in 0.0..3.0f64) {
        let spec = HamiltonianSpec::default();
        let next = evolve(&s, tau, &spec);
        prop_assert!((next.norm_sqr() - 1.0).abs() <= 1e-12);
        prop_assert!((next.bloch_vector()[0] - s.bloch_vector()[0]).abs() <= 1e-12);
    }

    #[test]
    fn propagator_antiperiodic(tau in 0.0..2.0f64) {
        let spec = HamiltonianSpec::default();
        let a = propagator(tau + 1.0, &spec);
        let b = propagator(tau, &spec);
        let sum = a.0.iter().flatten().zip(b.0.iter().flatten()).map(|(x, y)| (x + y).norm()).fold(0.0, f64::max);
        prop_assert!(sum < 1e-12);
    }

    #[test]
    fn commutator_identity(p in params(), tau in 0.0..1.0f64, o in outcome()) {
        let spec = HamiltonianSpec::default();
        prop_assert!(commutator_residual(&p.operation(o), tau, &spec) <= 1e-12);
    }

    #[test]
    fn nseries_probabilities_normalized(s in state(), p in params(), n in 1u32..=64) {
        let total: f64 = (0..=n).map(|k| nseries_probability(&s, &p, n, k).unwrap()).sum();
        prop_assert!((total - 1.0).abs() <= 1e-10, "sum = {}", total);
    }

    #[test]
    fn fidelity_bounded_and_monotone(s in state(), p in params(), n in 1u32..63) {
        let f1 = fidelity(&p, n, &s).unwrap();
        let f2 = fidelity(&p, n + 1, &s).unwrap();
        let floor = (1.0 - 2.0 * s.p_ground() * s.p_excited()).sqrt();
        prop_assert!(f1 <= 1.0 + 1e-12 && f1 >= floor - 1e-12);
        prop_assert!(f2 <= f1 + 1e-12);
    }

    #[test]
    fn fidelity_large_n_limit(s in state(), lo in 0.0..0.2f64, hi in 0.8..=1.0f64, flip in prop::bool::ANY) {
        let p = if flip { PovmParams::new(hi, lo) } else { PovmParams::new(lo, hi) }.unwrap();
        let limit = (1.0 - 2.0 * s.p_ground() * s.p_excited()).sqrt();
        prop_assert!((fidelity(&p, 64, &s).unwrap() - limit).abs() < 1e-3);
    }

    #[test]
    fn sigma_g2_shrinks_with_n(s in state(), p in genuine_params(), n in 1u32..64) {
        prop_assert!(sigma_g2(&s, &p, n + 1).unwrap() < sigma_g2(&s, &p, n).unwrap());
    }

    #[test]
    fn sigma_g2_shrinks_with_contrast(s in state(), p0 in 0.2..0.8f64, a in 0.01..0.2f64, b in 0.01..0.2f64, n in 1u32..64) {
        prop_assume!((a - b).abs() > 1e-3);
        let (small, large) = (a.min(b), a.max(b));
        let sharp = PovmParams::from_p0_dp(p0, 2.0 * large * p0.min(1.0 - p0)).unwrap();
        let weak = PovmParams::from_p0_dp(p0, 2.0 * small * p0.min(1.0 - p0)).unwrap();
        prop_assert!(sigma_g2(&s, &sharp, n).unwrap() < sigma_g2(&s, &weak, n).unwrap());
    }

    #[test]
    fn regime_classification_monotone(a in 0.0..100.0f64, b in 0.0..100.0f64) {
        let rank = |r: Regime| match r {
            Regime::QuantumJump => 0,
            Regime::Intermediate => 1,
            Regime::Rabi => 2,
        };
        let t = RegimeThresholds::default();
        let (lo, hi) = (a.min(b), a.max(b));
        prop_assert!(rank(classify_regime(lo, &t)) <= rank(classify_regime(hi, &t)));
    }

    #[test]
    fn dft_round_trip(xs in prop::collection::vec(-10.0..10.0f64, 4..300)) {
        let spec = power_spectrum(&xs, 0.05).unwrap();
        let back = synthesize(&spec);
        for (a, b) in xs.iter().zip(&back) {
            prop_assert!((a - b).abs() < 1e-9);
        }
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        prop_assert!((spec.coefficients[0].re - mean).abs() < 1e-9);
        let energy = xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64;
        prop_assert!((spec.total_power() - energy).abs() < 1e-9 * energy.max(1.0));
    }

    #[test]
    fn filtering_never_adds_power(xs in prop::collection::vec(-1.0..1.0f64, 8..300)) {
        let spec = power_spectrum(&xs, 0.05).unwrap();
        let filtered = wiener_filter(&spec);
        let truncated = truncate_series(&filtered);
        prop_assert!(filtered.total_power() <= spec.total_power() + 1e-12);
        prop_assert!(truncated.total_power() <= filtered.total_power() + 1e-12);
        for z in synthesize_complex(&truncated) {
            prop_assert!(z.im.abs() < 1e-9);
        }
        prop_assert!(filtered.wiener_weights.iter().all(|w| (0.0..=1.0).contains(w)));
        let out = process_readout(&xs, 0.05).unwrap();
        prop_assert_eq!(out.len(), xs.len());
    }

    #[test]
    fn disturbance_rotates_out_of_plane(theta in 0.0..=PI, sign in prop::bool::ANY) {
        let phi = if sign { PI / 2.0 } else { -PI / 2.0 };
        let s = StateVector::from_angles(theta, phi);
        let [x, y, _] = s.bloch_vector();
        prop_assert!(x.abs() < 1e-12);
        let [x2, _, _] = s.unitary_disturbance(PI / 4.0).bloch_vector();
        prop_assert!((x2.abs() - y.abs() * (PI / 4.0).sin()).abs() < 1e-12);
    }
}

#[test]
fn genuine_operations_are_not_projectors() {
    let p = PovmParams::new(0.65, 0.35).unwrap();
    let (plus, _) = p.operations();
    let s = StateVector::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0))
        .unwrap()
        .normalize()
        .unwrap();
    let once = plus.apply(&s, true).unwrap();
    let twice = plus.apply(&once, true).unwrap();
    assert!((once.c2 - twice.c2).norm() > 1e-3);
}
