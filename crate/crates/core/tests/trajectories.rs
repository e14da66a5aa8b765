//! Behaviour of whole trajectories in the three measurement regimes.

use std::f64::consts::PI;

use unsharp_core::analysis::{pearson, power_spectrum, process_readout_with, ProcessOptions};
use unsharp_core::dynamics::HamiltonianSpec;
use unsharp_core::nseries::RegimeParams;
use unsharp_core::trajectory::{
    derive_seed, rng_from_seed, simulate_trajectory, simulate_trajectory_with, Engine, Stepper,
};
use unsharp_core::{PovmParams, StateVector, TrajectoryConfig};

fn config(dp: f64, m: usize, seed: u64) -> TrajectoryConfig {
    TrajectoryConfig {
        params: PovmParams::from_p0_dp(0.5, dp).unwrap(),
        spec: HamiltonianSpec::default(),
        tau: 0.002,
        n_per_series: 25,
        m_series: m,
        initial_state: StateVector::ground(),
        seed,
    }
}

fn median(xs: &[f64]) -> f64 {
    let mut xs = xs.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

#[test]
fn normalization_holds_over_long_runs() {
    let stepper = Stepper::new(
        PovmParams::new(0.65, 0.35).unwrap(),
        0.002,
        &HamiltonianSpec::default(),
        Engine::Povm,
    );
    let mut rng = rng_from_seed(30);
    let mut state = StateVector::ground();
    for _ in 0..100_000 {
        state = stepper.step(&state, &mut rng).unwrap().0;
        assert!((state.norm_sqr() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn records_are_well_formed() {
    let rec = simulate_trajectory(&config(0.08, 200, 31)).unwrap();
    assert_eq!(rec.samples.len(), 200);
    for (i, s) in rec.samples.iter().enumerate() {
        assert_eq!(s.m, i + 1);
        assert!((s.t - (i + 1) as f64 * 0.05).abs() < 1e-12);
        assert!((-1e-12..=1.0 + 1e-12).contains(&s.c2_sq));
    }
    assert_eq!(rec, simulate_trajectory(&config(0.08, 200, 31)).unwrap());
}

#[test]
fn engines_agree_sample_for_sample() {
    let cfg = config(0.08, 300, 32);
    let a = simulate_trajectory_with(&cfg, Engine::Povm).unwrap();
    let b = simulate_trajectory_with(&cfg, Engine::Dilation).unwrap();
    for (x, y) in a.samples.iter().zip(&b.samples) {
        assert_eq!(x.g2, y.g2);
        assert!((x.c2_sq - y.c2_sq).abs() < 1e-12);
    }
}

#[test]
fn zeno_freezing_with_sharp_measurements() {
    for dp in [1.0, -1.0] {
        let stepper = Stepper::new(
            PovmParams::from_p0_dp(0.5, dp).unwrap(),
            0.002,
            &HamiltonianSpec::default(),
            Engine::Povm,
        );
        let runs = 1000;
        let steps = 500; // one Rabi period
        let mut escaped = 0;
        for run in 0..runs {
            let mut rng = rng_from_seed(derive_seed(33, run));
            let mut state = StateVector::ground();
            for _ in 0..steps {
                state = stepper.step(&state, &mut rng).unwrap().0;
                if state.p_excited() >= 0.1 {
                    escaped += 1;
                    break;
                }
            }
        }
        let fraction = escaped as f64 / runs as f64;
        assert!(fraction < 0.2, "dp={dp}: escape fraction {fraction}");
    }
}

#[test]
fn rabi_regime_peak_at_rabi_frequency() {
    let cfg = config(0.01, 2000, 34);
    let f = RegimeParams::evaluate(&cfg.params, cfg.tau, 1.0, 25)
        .unwrap()
        .f;
    assert!(f >= 50.0);
    let rec = simulate_trajectory(&cfg).unwrap();
    let spec = power_spectrum(&rec.c2_sq(), cfg.dt_series()).unwrap();
    let peak = spec.main_peak.unwrap();
    // Ω_R = 2π/T_R sits at bin M·Δt = 100.
    assert!((peak.index as i64 - 100).abs() <= 1);
    assert!((peak.omega / (2.0 * PI) - 1.0).abs() < 0.05);
}

#[test]
fn quantum_jump_regime_dwells_near_eigenstates() {
    let mut dwell = Vec::new();
    let mut corr = Vec::new();
    for i in 0..10 {
        let rec = simulate_trajectory(&config(-0.3, 2000, derive_seed(35, i))).unwrap();
        let c2 = rec.c2_sq();
        let near = c2.iter().filter(|&&v| !(0.1..=0.9).contains(&v)).count();
        dwell.push(near as f64 / c2.len() as f64);
        corr.push(pearson(&rec.g2(), &c2).unwrap());
    }
    assert!(median(&dwell) > 0.8);
    assert!(median(&corr) >= 0.6);
}

#[test]
fn rabi_regime_follows_free_oscillation_over_short_records() {
    // Measurement back-action slowly diffuses the oscillation phase, so the
    // comparison with the free curve is made over two Rabi periods.
    let mut devs = Vec::new();
    for i in 0..10 {
        let rec = simulate_trajectory(&config(0.01, 40, derive_seed(36, i))).unwrap();
        let dev = rec
            .samples
            .iter()
            .map(|s| (s.c2_sq - (PI * s.t).sin().powi(2)).abs())
            .fold(0.0, f64::max);
        devs.push(dev);
    }
    assert!(median(&devs) < 0.15);
}

#[test]
fn intermediate_regime_processing_improves_readout() {
    let mut raw = Vec::new();
    let mut processed = Vec::new();
    let mut bin_gap = Vec::new();
    for i in 0..10 {
        let cfg = config(0.08, 2000, derive_seed(42, i));
        let rec = simulate_trajectory(&cfg).unwrap();
        let c2 = rec.c2_sq();
        let g2 = rec.g2();
        let out = process_readout_with(&g2, cfg.dt_series(), ProcessOptions::default()).unwrap();
        raw.push(pearson(&g2, &c2).unwrap());
        processed.push(pearson(&out.values, &c2).unwrap());
        let c2_peak = power_spectrum(&c2, cfg.dt_series())
            .unwrap()
            .main_peak
            .unwrap();
        let g2_peak = out.spectrum.main_peak.unwrap();
        bin_gap.push((c2_peak.index as f64 - g2_peak.index as f64).abs());

        // No power is left above twice the readout's main peak.
        let cut = out.filtered.truncated_at.unwrap();
        assert_eq!(cut, (2 * g2_peak.index).min(out.filtered.nyquist()));
        let m = out.filtered.len();
        for (l, p) in out.filtered.power.iter().enumerate() {
            if l.min(m - l) > cut {
                assert_eq!(*p, 0.0);
            }
        }
    }
    assert!(median(&processed) > median(&raw));
    assert!(median(&bin_gap) <= 2.0, "{bin_gap:?}");
}
