//! Monte Carlo simulation of a single driven system under repeated unsharp
//! measurements.
//!
//! One step evolves the state by `τ`, draws a readout with probability
//! `⟨E±⟩` on the evolved state and applies the matching operation. `N` steps
//! form a series whose `+` count yields the best guess `G₂`; `M` series are
//! chained into a trajectory.
//!
//! RNG stream order: evolution draws nothing, every measurement draws exactly
//! one `f64` uniform in `[0, 1)` from a ChaCha20 stream seeded with
//! `seed_from_u64(seed)`. Outcome `+` is selected when `u < p₊`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{propagator, HamiltonianSpec, Mat2};
use crate::error::{Error, Result};
use crate::meter;
use crate::nseries::{nbound, NBound, NSeriesOutcome, MAX_SERIES_LEN};
use crate::povm::{Operation, Outcome, PovmParams, StateVector};

/// Generator used by every simulation entry point.
pub type SimRng = ChaCha20Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed for the `index`-th independent run derived from a base seed.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    seed ^ splitmix64(index)
}

/// How a single measurement is carried out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    /// Operations `M±` applied directly.
    #[default]
    Povm,
    /// Coupling to a meter followed by a projective meter readout.
    Dilation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryConfig {
    pub params: PovmParams,
    pub spec: HamiltonianSpec,
    /// Time between measurements, in units of `T_R`.
    pub tau: f64,
    pub n_per_series: u32,
    pub m_series: usize,
    pub initial_state: StateVector,
    pub seed: u64,
}

/// Non-fatal findings about a configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConfigWarning {
    /// `Δt = Nτ` is not small compared with `T_R`.
    CoarseSeries {
        dt_series: f64,
        t_r: f64,
    },
    /// `(N − 1)²` is not small compared with the N-bound.
    NBoundViolated {
        ratio: f64,
    },
    NBoundLoose {
        ratio: f64,
    },
}

impl std::fmt::Display for ConfigWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigWarning::CoarseSeries { dt_series, t_r } => write!(
                f,
                "series duration N·tau = {dt_series} is not small against T_R = {t_r} (>= T_R/10)"
            ),
            ConfigWarning::NBoundViolated { ratio } => {
                write!(f, "N-bound violated: (N-1)^2/rhs = {ratio} >= 1")
            }
            ConfigWarning::NBoundLoose { ratio } => {
                write!(f, "N-bound only loosely satisfied: (N-1)^2/rhs = {ratio}")
            }
        }
    }
}

/// Outcome of validating a [`TrajectoryConfig`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigCheck {
    pub dt_series: f64,
    pub nbound: NBound,
    pub warnings: Vec<ConfigWarning>,
}

impl TrajectoryConfig {
    /// Series duration `Δt = Nτ`.
    pub fn dt_series(&self) -> f64 {
        f64::from(self.n_per_series) * self.tau
    }

    pub fn validate(&self) -> Result<ConfigCheck> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidConfig {
                field: "tau",
                reason: format!("must be > 0, got {}", self.tau),
            });
        }
        if !(1..=MAX_SERIES_LEN).contains(&self.n_per_series) {
            return Err(Error::InvalidConfig {
                field: "n_per_series",
                reason: format!(
                    "must be in [1, {MAX_SERIES_LEN}], got {}",
                    self.n_per_series
                ),
            });
        }
        if self.m_series == 0 {
            return Err(Error::InvalidConfig {
                field: "m_series",
                reason: "must be >= 1".into(),
            });
        }
        if self.params.dp() == 0.0 {
            return Err(Error::InvalidConfig {
                field: "dp",
                reason: "the best guess needs p1 != p2".into(),
            });
        }
        if !self.initial_state.is_normalized() {
            return Err(Error::InvalidConfig {
                field: "initial_state",
                reason: format!("norm² = {}, expected 1", self.initial_state.norm_sqr()),
            });
        }

        let dt_series = self.dt_series();
        let bound = nbound(&self.params, self.tau, self.spec.t_r, self.n_per_series)?;
        let mut warnings = Vec::new();
        if dt_series >= self.spec.t_r / 10.0 {
            warnings.push(ConfigWarning::CoarseSeries {
                dt_series,
                t_r: self.spec.t_r,
            });
        }
        if !bound.satisfied {
            warnings.push(ConfigWarning::NBoundViolated { ratio: bound.ratio });
        } else if bound.loose {
            warnings.push(ConfigWarning::NBoundLoose { ratio: bound.ratio });
        }
        Ok(ConfigCheck {
            dt_series,
            nbound: bound,
            warnings,
        })
    }
}

/// One recorded series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub m: usize,
    /// `t_m = m·Δt` in units of `T_R`.
    pub t: f64,
    pub c2_sq: f64,
    pub g2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub config: TrajectoryConfig,
    pub engine: Engine,
    pub samples: Vec<Sample>,
    pub rng_seed: u64,
}

impl TrajectoryRecord {
    pub fn c2_sq(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.c2_sq).collect()
    }

    pub fn g2(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.g2).collect()
    }
}

/// Precomputed propagator and operations for repeated measurement steps.
#[derive(Debug, Clone)]
pub struct Stepper {
    params: PovmParams,
    propagator: Mat2,
    plus: Operation,
    minus: Operation,
    engine: Engine,
}

impl Stepper {
    /// `tau = 0` gives measurements in immediate succession.
    pub fn new(params: PovmParams, tau: f64, spec: &HamiltonianSpec, engine: Engine) -> Self {
        let (plus, minus) = params.operations();
        Stepper {
            params,
            propagator: propagator(tau, spec),
            plus,
            minus,
            engine,
        }
    }

    pub fn params(&self) -> &PovmParams {
        &self.params
    }

    /// Evolve by `τ`, then measure once.
    pub fn step<R: Rng + ?Sized>(
        &self,
        state: &StateVector,
        rng: &mut R,
    ) -> Result<(StateVector, Outcome)> {
        let evolved = self.propagator.apply(state);
        match self.engine {
            Engine::Povm => {
                let (p_plus, _) = self.params.outcome_probabilities(&evolved)?;
                let u: f64 = rng.random();
                if u < p_plus {
                    Ok((self.plus.apply(&evolved, true)?, Outcome::Plus))
                } else {
                    Ok((self.minus.apply(&evolved, true)?, Outcome::Minus))
                }
            }
            Engine::Dilation => {
                let compound = meter::dilate(&evolved, &self.params)?;
                let (outcome, next) = meter::measure_meter(&compound, rng)?;
                Ok((next, outcome))
            }
        }
    }

    /// `n` consecutive steps; the outcome's `G₂` is built from the `+` count.
    pub fn nseries<R: Rng + ?Sized>(
        &self,
        state: &StateVector,
        n: u32,
        rng: &mut R,
    ) -> Result<(StateVector, NSeriesOutcome)> {
        let mut current = *state;
        let mut n_plus = 0;
        for _ in 0..n {
            let (next, outcome) = self.step(&current, rng)?;
            if outcome == Outcome::Plus {
                n_plus += 1;
            }
            current = next;
        }
        Ok((current, NSeriesOutcome::new(n, n_plus, &self.params)?))
    }
}

/// One measurement step of `config`.
pub fn simulate_step<R: Rng + ?Sized>(
    state: &StateVector,
    config: &TrajectoryConfig,
    rng: &mut R,
) -> Result<(StateVector, Outcome)> {
    Stepper::new(config.params, config.tau, &config.spec, Engine::Povm).step(state, rng)
}

/// One N-series of `config`.
pub fn simulate_nseries<R: Rng + ?Sized>(
    state: &StateVector,
    config: &TrajectoryConfig,
    rng: &mut R,
) -> Result<(StateVector, NSeriesOutcome)> {
    Stepper::new(config.params, config.tau, &config.spec, Engine::Povm).nseries(
        state,
        config.n_per_series,
        rng,
    )
}

pub fn simulate_trajectory(config: &TrajectoryConfig) -> Result<TrajectoryRecord> {
    simulate_trajectory_with(config, Engine::Povm)
}

/// Runs `M` chained N-series. `|c2|²` is sampled after each series completes.
pub fn simulate_trajectory_with(
    config: &TrajectoryConfig,
    engine: Engine,
) -> Result<TrajectoryRecord> {
    let check = config.validate()?;
    let stepper = Stepper::new(config.params, config.tau, &config.spec, engine);
    let mut rng = rng_from_seed(config.seed);
    let mut state = config.initial_state;
    let mut samples = Vec::with_capacity(config.m_series);
    for m in 1..=config.m_series {
        let (next, outcome) = stepper.nseries(&state, config.n_per_series, &mut rng)?;
        state = next;
        samples.push(Sample {
            m,
            t: m as f64 * check.dt_series,
            c2_sq: state.p_excited(),
            g2: outcome.g2,
        });
    }
    Ok(TrajectoryRecord {
        config: *config,
        engine,
        samples,
        rng_seed: config.seed,
    })
}
