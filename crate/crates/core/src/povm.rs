//! Two-level states and the diagonal, positive two-outcome measurement class.
//!
//! A measurement is fixed by the pair `(p1, p2)`: the probability of a `+`
//! readout when the system sits in `|1⟩` or `|2⟩` respectively. The operations
//! are `M₊ = diag(√p1, √p2)` and `M₋ = diag(√(1−p1), √(1−p2))`; the effects
//! `E± = M±†M±` sum to the identity.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for treating a state as normalized on input.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Floating-point slack allowed before a probability outside `[0, 1]` is an error.
pub const PROBABILITY_SLACK: f64 = 1e-12;

/// Amplitudes `(c1, c2)` in the `{|1⟩, |2⟩}` basis. Never the zero vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    pub c1: Complex64,
    pub c2: Complex64,
}

impl StateVector {
    pub fn new(c1: Complex64, c2: Complex64) -> Result<Self> {
        let state = StateVector { c1, c2 };
        if state.norm_sqr() > 0.0 && state.norm_sqr().is_finite() {
            Ok(state)
        } else {
            Err(Error::ZeroState)
        }
    }

    /// `|1⟩`
    pub fn ground() -> Self {
        StateVector {
            c1: Complex64::new(1.0, 0.0),
            c2: Complex64::new(0.0, 0.0),
        }
    }

    /// `|2⟩`
    pub fn excited() -> Self {
        StateVector {
            c1: Complex64::new(0.0, 0.0),
            c2: Complex64::new(1.0, 0.0),
        }
    }

    /// `(|1⟩ + |2⟩)/√2`
    pub fn uniform() -> Self {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        StateVector {
            c1: Complex64::new(a, 0.0),
            c2: Complex64::new(a, 0.0),
        }
    }

    /// Normalized state from Bloch polar angle `theta` and azimuth `phi`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        StateVector {
            c1: Complex64::new((theta / 2.0).cos(), 0.0),
            c2: Complex64::from_polar((theta / 2.0).sin(), phi),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c1.norm_sqr() + self.c2.norm_sqr()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOLERANCE
    }

    pub fn ensure_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::NotNormalized {
                norm_sqr: self.norm_sqr(),
            })
        }
    }

    pub fn normalize(&self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroState);
        }
        Ok(StateVector {
            c1: self.c1 / norm,
            c2: self.c2 / norm,
        })
    }

    /// `|c1|²`
    pub fn p_ground(&self) -> f64 {
        self.c1.norm_sqr()
    }

    /// `|c2|²`
    pub fn p_excited(&self) -> f64 {
        self.c2.norm_sqr()
    }

    /// Coherence `c1*·c2`.
    pub fn coherence(&self) -> Complex64 {
        self.c1.conj() * self.c2
    }

    /// Bloch vector `(x, y, z)` with `x = 2 Re(c1*c2)`, `y = 2 Im(c1*c2)`,
    /// `z = |c1|² − |c2|²`, so that `|1⟩` sits at the north pole.
    pub fn bloch_vector(&self) -> [f64; 3] {
        let coh = self.coherence();
        [
            2.0 * coh.re,
            2.0 * coh.im,
            self.p_ground() - self.p_excited(),
        ]
    }

    /// Applies the phase unitary `diag(e^{−iθ/2}, e^{+iθ/2})`, a Bloch rotation
    /// by `theta` about the z axis.
    pub fn unitary_disturbance(&self, theta: f64) -> Self {
        StateVector {
            c1: self.c1 * Complex64::from_polar(1.0, -theta / 2.0),
            c2: self.c2 * Complex64::from_polar(1.0, theta / 2.0),
        }
    }
}

/// Measurement readout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Plus,
    Minus,
}

/// Diagonal operation `diag(u1, u2)` with non-negative entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Operation {
    pub u1: f64,
    pub u2: f64,
}

impl Operation {
    pub fn new(u1: f64, u2: f64) -> Result<Self> {
        for (name, value) in [("u1", u1), ("u2", u2)] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::ParameterDomain {
                    name,
                    value,
                    expected: "finite and >= 0",
                });
            }
        }
        Ok(Operation { u1, u2 })
    }

    /// Diagonal of the effect `M†M`.
    pub fn effect(&self) -> (f64, f64) {
        (self.u1 * self.u1, self.u2 * self.u2)
    }

    /// Scales `c1 → u1·c1`, `c2 → u2·c2`, optionally renormalizing.
    ///
    /// A vanishing result means the outcome had zero probability on `state`
    /// and is reported as [`Error::DegenerateOutcome`].
    pub fn apply(&self, state: &StateVector, renormalize: bool) -> Result<StateVector> {
        let out = StateVector {
            c1: state.c1 * self.u1,
            c2: state.c2 * self.u2,
        };
        if out.norm_sqr() == 0.0 {
            return Err(Error::DegenerateOutcome);
        }
        if renormalize {
            out.normalize()
        } else {
            Ok(out)
        }
    }
}

/// The pair `(p1, p2)` defining `E₊ = diag(p1, p2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PovmParams {
    p1: f64,
    p2: f64,
}

fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::ParameterDomain {
            name,
            value,
            expected: "[0, 1]",
        })
    }
}

impl PovmParams {
    pub fn new(p1: f64, p2: f64) -> Result<Self> {
        check_probability("p1", p1)?;
        check_probability("p2", p2)?;
        Ok(PovmParams { p1, p2 })
    }

    /// Builds `p1 = p0 − dp/2`, `p2 = p0 + dp/2`.
    pub fn from_p0_dp(p0: f64, dp: f64) -> Result<Self> {
        check_probability("p0", p0)?;
        if !(-1.0..=1.0).contains(&dp) {
            return Err(Error::ParameterDomain {
                name: "dp",
                value: dp,
                expected: "[-1, 1]",
            });
        }
        PovmParams::new(p0 - dp / 2.0, p0 + dp / 2.0)
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn p2(&self) -> f64 {
        self.p2
    }

    pub fn p0(&self) -> f64 {
        0.5 * (self.p1 + self.p2)
    }

    pub fn dp(&self) -> f64 {
        self.p2 - self.p1
    }

    /// `(u1⁺, u2⁺) = (√p1, √p2)`
    pub fn u_plus(&self) -> (f64, f64) {
        (self.p1.sqrt(), self.p2.sqrt())
    }

    /// `(u1⁻, u2⁻) = (√(1−p1), √(1−p2))`
    pub fn u_minus(&self) -> (f64, f64) {
        ((1.0 - self.p1).sqrt(), (1.0 - self.p2).sqrt())
    }

    /// `(M₊, M₋)`
    pub fn operations(&self) -> (Operation, Operation) {
        let (a1, a2) = self.u_plus();
        let (b1, b2) = self.u_minus();
        (Operation { u1: a1, u2: a2 }, Operation { u1: b1, u2: b2 })
    }

    pub fn operation(&self, outcome: Outcome) -> Operation {
        let (plus, minus) = self.operations();
        match outcome {
            Outcome::Plus => plus,
            Outcome::Minus => minus,
        }
    }

    /// `(p₊, p₋)` on a normalized state.
    pub fn outcome_probabilities(&self, state: &StateVector) -> Result<(f64, f64)> {
        state.ensure_normalized()?;
        let p_plus = clamp_probability(self.p1 * state.p_ground() + self.p2 * state.p_excited())?;
        Ok((p_plus, 1.0 - p_plus))
    }
}

/// Clamps values within [`PROBABILITY_SLACK`] of `[0, 1]`; larger excursions are errors.
pub fn clamp_probability(p: f64) -> Result<f64> {
    if (-PROBABILITY_SLACK..=1.0 + PROBABILITY_SLACK).contains(&p) {
        Ok(p.clamp(0.0, 1.0))
    } else {
        Err(Error::ProbabilityOutOfRange(p))
    }
}
