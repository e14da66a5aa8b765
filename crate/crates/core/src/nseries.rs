//! Closed-form statistics of an N-series: `N` repeated measurements whose
//! `+` count `N₊` is condensed into the relative frequency `r = N₊/N`.
//!
//! Also hosts the time scales that separate the measurement regimes: the
//! level resolution time, the fuzziness `f`, and the upper bound on `N`
//! beyond which the driven dynamics inside a series no longer commutes
//! through the measurement operations.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::povm::{PovmParams, StateVector};

/// Longest supported series. Binomial coefficients stay exact in `u64`.
pub const MAX_SERIES_LEN: u32 = 64;

/// Ratios above this value satisfy the N-bound only loosely.
pub const NBOUND_LOOSE_RATIO: f64 = 0.25;

/// Result of one N-series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NSeriesOutcome {
    pub n_total: u32,
    pub n_plus: u32,
    pub r: f64,
    pub g2: f64,
}

impl NSeriesOutcome {
    pub fn new(n_total: u32, n_plus: u32, params: &PovmParams) -> Result<Self> {
        check_counts(n_total, n_plus)?;
        let r = f64::from(n_plus) / f64::from(n_total);
        Ok(NSeriesOutcome {
            n_total,
            n_plus,
            r,
            g2: best_guess(r, params)?,
        })
    }
}

fn check_len(n: u32) -> Result<()> {
    if (1..=MAX_SERIES_LEN).contains(&n) {
        Ok(())
    } else {
        Err(Error::SeriesLength {
            n,
            max: MAX_SERIES_LEN,
        })
    }
}

fn check_counts(n: u32, n_plus: u32) -> Result<()> {
    check_len(n)?;
    if n_plus > n {
        return Err(Error::CountOutOfRange { n, n_plus });
    }
    Ok(())
}

fn require_dp(params: &PovmParams) -> Result<f64> {
    let dp = params.dp();
    if dp == 0.0 {
        Err(Error::UndefinedEstimator)
    } else {
        Ok(dp)
    }
}

/// Exact `C(n, k)` for `n ≤ 64`.
pub fn binomial(n: u32, k: u32) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    acc as u64
}

/// Diagonal of the series effect `E(N₊, N)`.
pub fn nseries_effect(params: &PovmParams, n: u32, n_plus: u32) -> Result<(f64, f64)> {
    check_counts(n, n_plus)?;
    let coeff = binomial(n, n_plus) as f64;
    let k = n_plus as i32;
    let rest = (n - n_plus) as i32;
    let entry = |p: f64| coeff * p.powi(k) * (1.0 - p).powi(rest);
    Ok((entry(params.p1()), entry(params.p2())))
}

/// Probability of observing `N₊` positive results in a series of `N`
/// measurements, without evolution between them.
pub fn nseries_probability(
    state: &StateVector,
    params: &PovmParams,
    n: u32,
    n_plus: u32,
) -> Result<f64> {
    state.ensure_normalized()?;
    let (e1, e2) = nseries_effect(params, n, n_plus)?;
    Ok(e1 * state.p_ground() + e2 * state.p_excited())
}

/// Fidelity between the pre-series state and the outcome mixture after it.
pub fn fidelity(params: &PovmParams, n: u32, state: &StateVector) -> Result<f64> {
    state.ensure_normalized()?;
    let (p1, p2) = (params.p1(), params.p2());
    let overlap = (p1 * p2).sqrt() + ((1.0 - p1) * (1.0 - p2)).sqrt();
    let b = overlap.powi(n as i32);
    let mix = state.p_ground() * state.p_excited();
    Ok((1.0 - 2.0 * mix * (1.0 - b)).max(0.0).sqrt())
}

/// Linear estimate `(r − p1)/Δp` of `|c2|²`. Not clamped to `[0, 1]`.
pub fn best_guess(r: f64, params: &PovmParams) -> Result<f64> {
    let dp = require_dp(params)?;
    Ok((r - params.p1()) / dp)
}

/// `E(r) = p1|c1|² + p2|c2|²`, independent of `N`.
pub fn expectation_r(state: &StateVector, params: &PovmParams) -> Result<f64> {
    state.ensure_normalized()?;
    Ok(params.p1() * state.p_ground() + params.p2() * state.p_excited())
}

pub fn variance_r(state: &StateVector, params: &PovmParams, n: u32) -> Result<f64> {
    state.ensure_normalized()?;
    if n == 0 {
        return Err(Error::SeriesLength {
            n,
            max: MAX_SERIES_LEN,
        });
    }
    let (a, b) = (state.p_ground(), state.p_excited());
    let (p1, p2) = (params.p1(), params.p2());
    let dp = params.dp();
    Ok(a * b * dp * dp + (a * p1 * (1.0 - p1) + b * p2 * (1.0 - p2)) / f64::from(n))
}

/// Standard deviation of the best guess, `σ(r)/|Δp|`.
pub fn sigma_g2(state: &StateVector, params: &PovmParams, n: u32) -> Result<f64> {
    let dp = require_dp(params)?;
    Ok(variance_r(state, params, n)?.sqrt() / dp.abs())
}

/// Smallest `N` for which `σ(G₂) ≤ 1` holds for every state.
pub fn min_n_level_resolution(params: &PovmParams) -> Result<u32> {
    let dp = require_dp(params)?;
    let p0 = params.p0();
    let bound = 4.0 * p0 * (1.0 - p0) / (3.0 * dp * dp) + 4.0 / 9.0;
    Ok((bound.ceil() as u32).max(1))
}

/// Level resolution time `τ·4p0(1−p0)/(3Δp²)`, in the units of `tau`.
///
/// A deterministic measurement (`p0(1−p0) = 0`) resolves instantly.
pub fn level_resolution_time(params: &PovmParams, tau: f64) -> Result<f64> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::ParameterDomain {
            name: "tau",
            value: tau,
            expected: "> 0",
        });
    }
    let p0 = params.p0();
    let spread = p0 * (1.0 - p0);
    if spread == 0.0 {
        return Ok(0.0);
    }
    let dp = require_dp(params)?;
    Ok(tau * 4.0 * spread / (3.0 * dp * dp))
}

/// Fuzziness `3π·T_lr/T_R`.
pub fn fuzziness(t_lr: f64, t_r: f64) -> Result<f64> {
    if t_r.is_nan() || t_r <= 0.0 {
        return Err(Error::ParameterDomain {
            name: "t_r",
            value: t_r,
            expected: "> 0",
        });
    }
    Ok(3.0 * PI * t_lr / t_r)
}

/// Evaluation of the upper limit on `N` for a driven series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NBound {
    /// Right-hand side; `None` when the operations are proportional to the identity.
    pub rhs: Option<f64>,
    /// `(N − 1)² / rhs`
    pub ratio: f64,
    pub satisfied: bool,
    /// Satisfied, but with `ratio` above [`NBOUND_LOOSE_RATIO`].
    pub loose: bool,
}

/// `(N−1)² ≪ max{u1⁺, u2⁻} / (2·max{|u2⁺−u1⁺|, |u2⁻−u1⁻|}) · T_R/(πτ)`,
/// operationalized as `ratio < 1`.
///
/// The numerator uses `max{u1⁺, u2⁻}` with the level labels as given.
pub fn nbound(params: &PovmParams, tau: f64, t_r: f64, n: u32) -> Result<NBound> {
    if tau.is_nan() || tau <= 0.0 {
        return Err(Error::ParameterDomain {
            name: "tau",
            value: tau,
            expected: "> 0",
        });
    }
    let (a1, a2) = params.u_plus();
    let (b1, b2) = params.u_minus();
    let spread = (a2 - a1).abs().max((b2 - b1).abs());
    let lhs = f64::from(n.saturating_sub(1)).powi(2);
    if spread == 0.0 {
        return Ok(NBound {
            rhs: None,
            ratio: 0.0,
            satisfied: true,
            loose: false,
        });
    }
    let rhs = a1.max(b2) / (2.0 * spread) * t_r / (PI * tau);
    let ratio = lhs / rhs;
    Ok(NBound {
        rhs: Some(rhs),
        ratio,
        satisfied: ratio < 1.0,
        loose: ratio < 1.0 && ratio > NBOUND_LOOSE_RATIO,
    })
}

/// Time scales and bounds characterizing one measurement configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeParams {
    pub tau: f64,
    pub t_r: f64,
    pub t_lr: f64,
    pub f: f64,
    pub n_min: u32,
    pub nbound: NBound,
}

impl RegimeParams {
    pub fn evaluate(params: &PovmParams, tau: f64, t_r: f64, n: u32) -> Result<Self> {
        let t_lr = level_resolution_time(params, tau)?;
        Ok(RegimeParams {
            tau,
            t_r,
            t_lr,
            f: fuzziness(t_lr, t_r)?,
            n_min: min_n_level_resolution(params)?,
            nbound: nbound(params, tau, t_r, n)?,
        })
    }
}
