//! System ⊗ meter realization of the unsharp measurement.
//!
//! The system couples to a two-level meter with states `|Φ₊⟩, |Φ₋⟩`; a sharp
//! measurement on the meter alone then reproduces the POVM statistics and
//! post-measurement states. Only the action on product inputs
//! `|ψ⟩|Φ(0)⟩` is modelled.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::povm::{clamp_probability, Outcome, PovmParams, StateVector};

/// Amplitudes over `{|1⟩|Φ₊⟩, |1⟩|Φ₋⟩, |2⟩|Φ₊⟩, |2⟩|Φ₋⟩}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompoundState {
    pub amps: [Complex64; 4],
}

impl CompoundState {
    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Probability of finding the meter in `|Φ₊⟩`.
    pub fn meter_plus_probability(&self) -> Result<f64> {
        clamp_probability(self.amps[0].norm_sqr() + self.amps[2].norm_sqr())
    }

    /// Conditional system state after projecting the meter onto `outcome`,
    /// renormalized. The compound state after projection is this state times
    /// the corresponding meter state.
    pub fn project(&self, outcome: Outcome) -> Result<StateVector> {
        let (c1, c2) = match outcome {
            Outcome::Plus => (self.amps[0], self.amps[2]),
            Outcome::Minus => (self.amps[1], self.amps[3]),
        };
        let conditional = StateVector { c1, c2 };
        if conditional.norm_sqr() == 0.0 {
            return Err(Error::DegenerateOutcome);
        }
        conditional.normalize()
    }

    /// Compound amplitudes after projecting the meter onto `outcome`
    /// (unnormalized; the complementary meter branch is zeroed).
    pub fn projected_amplitudes(&self, outcome: Outcome) -> [Complex64; 4] {
        let zero = Complex64::new(0.0, 0.0);
        match outcome {
            Outcome::Plus => [self.amps[0], zero, self.amps[2], zero],
            Outcome::Minus => [zero, self.amps[1], zero, self.amps[3]],
        }
    }
}

/// Unitary coupling of a normalized system state to the meter.
pub fn dilate(state: &StateVector, params: &PovmParams) -> Result<CompoundState> {
    state.ensure_normalized()?;
    let (a1, a2) = params.u_plus();
    let (b1, b2) = params.u_minus();
    Ok(CompoundState {
        amps: [state.c1 * a1, state.c1 * b1, state.c2 * a2, state.c2 * b2],
    })
}

/// Projective readout of the meter. Consumes exactly one uniform variate;
/// `u < p₊` selects `+`.
pub fn measure_meter<R: Rng + ?Sized>(
    compound: &CompoundState,
    rng: &mut R,
) -> Result<(Outcome, StateVector)> {
    let p_plus = compound.meter_plus_probability()?;
    let u: f64 = rng.random();
    let outcome = if u < p_plus {
        Outcome::Plus
    } else {
        Outcome::Minus
    };
    Ok((outcome, compound.project(outcome)?))
}
