//! Run configuration: JSON file schema, presets, flag overrides and
//! resolution into a validated trajectory configuration.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use unsharp_core::analysis::ProcessOptions;
use unsharp_core::num_complex::Complex64;
use unsharp_core::trajectory::ConfigCheck;
use unsharp_core::{
    Engine, HamiltonianSpec, PovmParams, RegimeThresholds, StateVector, TrajectoryConfig,
};

/// Version tag written into every artifact.
pub const SCHEMA_VERSION: u32 = 1;

pub const DEFAULT_SEED: u64 = 42;

/// Measurement parameter sets of the three regimes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    /// Quantum-jump regime, `Δp = −0.3`.
    Fig1,
    /// Rabi regime, `Δp = 0.01`.
    Fig2,
    /// Intermediate regime, `Δp = 0.08`.
    Fig3,
}

impl Preset {
    pub fn dp(self) -> f64 {
        match self {
            Preset::Fig1 => -0.3,
            Preset::Fig2 => 0.01,
            Preset::Fig3 => 0.08,
        }
    }

    pub fn config(self) -> RunConfig {
        RunConfig {
            p0: Some(0.5),
            dp: Some(self.dp()),
            tau: Some(0.002),
            n_per_series: Some(25),
            m_series: Some(2000),
            initial_state: Some(InitialState::Named(NamedState::Ground)),
            seed: Some(DEFAULT_SEED),
            ..RunConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedState {
    Ground,
    Excited,
    Uniform,
}

/// Initial state as written in a config file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialState {
    Named(NamedState),
    /// Bloch angles.
    Angles {
        theta: f64,
        phi: f64,
    },
    /// Amplitudes as `[re, im]` pairs; normalized on resolution.
    Amplitudes {
        c1: [f64; 2],
        c2: [f64; 2],
    },
}

impl InitialState {
    fn resolve(&self) -> Result<StateVector> {
        let state = match *self {
            InitialState::Named(NamedState::Ground) => StateVector::ground(),
            InitialState::Named(NamedState::Excited) => StateVector::excited(),
            InitialState::Named(NamedState::Uniform) => StateVector::uniform(),
            InitialState::Angles { theta, phi } => StateVector::from_angles(theta, phi),
            InitialState::Amplitudes { c1, c2 } => {
                StateVector::new(Complex64::new(c1[0], c1[1]), Complex64::new(c2[0], c2[1]))
                    .and_then(|s| s.normalize())
                    .context("invalid configuration field `initial_state`")?
            }
        };
        Ok(state)
    }
}

/// Config file schema. Every field is optional so that presets, files and
/// flags can be layered; resolution reports whatever is still missing.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dp: Option<f64>,
    /// Time between measurements, as a fraction of `T_R`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_per_series: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_series: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<InitialState>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub engine: Option<Engine>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wiener: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncate: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_lo: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_hi: Option<f64>,
    /// Level energies `(a₁, a₂)`, metadata only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<(f64, f64)>,
    /// Driving frequency; must match `a₂ − a₁` when levels are given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drive_omega: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            if path == "." {
                anyhow::anyhow!("invalid configuration: {}", e.inner())
            } else {
                anyhow::anyhow!("invalid configuration field `{path}`: {}", e.inner())
            }
        })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("in config {}", path.display()))
    }

    /// Fields set in `other` replace those in `self`. Setting either
    /// parametrization of the effects drops the other one.
    pub fn overlay(mut self, other: RunConfig) -> RunConfig {
        if other.p1.is_some() || other.p2.is_some() {
            self.p0 = None;
            self.dp = None;
        }
        if other.p0.is_some() || other.dp.is_some() {
            self.p1 = None;
            self.p2 = None;
        }
        macro_rules! take {
            ($($f:ident),*) => { $(if other.$f.is_some() { self.$f = other.$f; })* };
        }
        take!(
            p1,
            p2,
            p0,
            dp,
            tau,
            n_per_series,
            m_series,
            initial_state,
            seed,
            engine,
            wiener,
            truncate,
            f_lo,
            f_hi,
            levels,
            drive_omega,
            out_dir
        );
        self
    }

    pub fn resolve(&self) -> Result<Resolved> {
        let params = match (self.p1, self.p2, self.p0, self.dp) {
            (Some(p1), Some(p2), None, None) => PovmParams::new(p1, p2)?,
            (None, None, Some(p0), Some(dp)) => PovmParams::from_p0_dp(p0, dp)?,
            (None, None, None, None) => {
                bail!("missing configuration field `p1`/`p2` (or `p0`/`dp`)")
            }
            (Some(_), None, None, None) => bail!("missing configuration field `p2`"),
            (None, Some(_), None, None) => bail!("missing configuration field `p1`"),
            (None, None, Some(_), None) => bail!("missing configuration field `dp`"),
            (None, None, None, Some(_)) => bail!("missing configuration field `p0`"),
            _ => bail!("invalid configuration field `p0`: give either p1/p2 or p0/dp, not both"),
        };
        let tau = self.tau.context("missing configuration field `tau`")?;
        let n_per_series = self
            .n_per_series
            .context("missing configuration field `n_per_series`")?;
        let m_series = self
            .m_series
            .context("missing configuration field `m_series`")?;
        let initial_state = self
            .initial_state
            .unwrap_or(InitialState::Named(NamedState::Ground))
            .resolve()?;
        let spec = HamiltonianSpec::new(1.0, self.levels, self.drive_omega)?;
        let thresholds = RegimeThresholds {
            f_lo: self.f_lo.unwrap_or(RegimeThresholds::default().f_lo),
            f_hi: self.f_hi.unwrap_or(RegimeThresholds::default().f_hi),
        };
        if !(thresholds.f_lo >= 0.0 && thresholds.f_lo <= thresholds.f_hi) {
            bail!(
                "invalid configuration field `f_lo`: need 0 <= f_lo <= f_hi, got f_lo = {}, f_hi = {}",
                thresholds.f_lo,
                thresholds.f_hi
            );
        }
        let trajectory = TrajectoryConfig {
            params,
            spec,
            tau,
            n_per_series,
            m_series,
            initial_state,
            seed: self.seed.unwrap_or(DEFAULT_SEED),
        };
        let check = trajectory.validate()?;
        Ok(Resolved {
            trajectory,
            check,
            engine: self.engine.unwrap_or_default(),
            options: ProcessOptions {
                wiener: self.wiener.unwrap_or(true),
                truncate: self.truncate.unwrap_or(true),
            },
            thresholds,
            out_dir: self.out_dir.clone().unwrap_or_else(|| PathBuf::from("out")),
        })
    }
}

/// Fully validated run.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub trajectory: TrajectoryConfig,
    pub check: ConfigCheck,
    pub engine: Engine,
    pub options: ProcessOptions,
    pub thresholds: RegimeThresholds,
    pub out_dir: PathBuf,
}

/// Resolved configuration as embedded in artifacts. Output locations are
/// left out so that artifacts do not depend on where they were written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddedConfig {
    pub p1: f64,
    pub p2: f64,
    pub tau: f64,
    pub n_per_series: u32,
    pub m_series: usize,
    pub initial_state: InitialState,
    pub seed: u64,
    pub engine: Engine,
    pub wiener: bool,
    pub truncate: bool,
    pub f_lo: f64,
    pub f_hi: f64,
    pub levels: Option<(f64, f64)>,
    pub drive_omega: Option<f64>,
}

impl From<&Resolved> for EmbeddedConfig {
    fn from(r: &Resolved) -> Self {
        let t = &r.trajectory;
        let s = t.initial_state;
        EmbeddedConfig {
            p1: t.params.p1(),
            p2: t.params.p2(),
            tau: t.tau,
            n_per_series: t.n_per_series,
            m_series: t.m_series,
            initial_state: InitialState::Amplitudes {
                c1: [s.c1.re, s.c1.im],
                c2: [s.c2.re, s.c2.im],
            },
            seed: t.seed,
            engine: r.engine,
            wiener: r.options.wiener,
            truncate: r.options.truncate,
            f_lo: r.thresholds.f_lo,
            f_hi: r.thresholds.f_hi,
            levels: t.spec.levels,
            drive_omega: t.spec.drive_omega,
        }
    }
}

impl From<&EmbeddedConfig> for RunConfig {
    fn from(e: &EmbeddedConfig) -> Self {
        RunConfig {
            p1: Some(e.p1),
            p2: Some(e.p2),
            tau: Some(e.tau),
            n_per_series: Some(e.n_per_series),
            m_series: Some(e.m_series),
            initial_state: Some(e.initial_state),
            seed: Some(e.seed),
            engine: Some(e.engine),
            wiener: Some(e.wiener),
            truncate: Some(e.truncate),
            f_lo: Some(e.f_lo),
            f_hi: Some(e.f_hi),
            levels: e.levels,
            drive_omega: e.drive_omega,
            ..RunConfig::default()
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::Fig1 => "fig1",
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
        })
    }
}
