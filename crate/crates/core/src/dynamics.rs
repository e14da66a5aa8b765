//! Resonant Rabi evolution in the interaction picture.
//!
//! Times are measured in units of the Rabi period `T_R`. The generator is
//! `H_I = ħΩ_R σ_x / 2`, so the propagator over `τ` is
//! `cos(πτ/T_R)·1 − i·sin(πτ/T_R)·σ_x`.

use std::f64::consts::PI;
use std::ops::{Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::povm::{Operation, StateVector};

const RESONANCE_TOLERANCE: f64 = 1e-9;

/// Dense 2×2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Mat2([[one, zero], [zero, one]])
    }

    pub fn diag(a: Complex64, b: Complex64) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Mat2([[a, zero], [zero, b]])
    }

    pub fn sigma_x() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Mat2([[zero, one], [one, zero]])
    }

    pub fn sigma_y() -> Self {
        let i = Complex64::new(0.0, 1.0);
        let zero = Complex64::new(0.0, 0.0);
        Mat2([[zero, -i], [i, zero]])
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let m = self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn dagger(&self) -> Self {
        let m = self.0;
        Mat2([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    pub fn det(&self) -> Complex64 {
        let m = self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, state: &StateVector) -> StateVector {
        let m = self.0;
        StateVector {
            c1: m[0][0] * state.c1 + m[0][1] * state.c2,
            c2: m[1][0] * state.c1 + m[1][1] * state.c2,
        }
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (self.0, rhs.0);
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(out)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;

    fn sub(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (self.0, rhs.0);
        Mat2([
            [a[0][0] - b[0][0], a[0][1] - b[0][1]],
            [a[1][0] - b[1][0], a[1][1] - b[1][1]],
        ])
    }
}

impl From<Operation> for Mat2 {
    fn from(op: Operation) -> Self {
        Mat2::diag(Complex64::new(op.u1, 0.0), Complex64::new(op.u2, 0.0))
    }
}

/// Driven two-level Hamiltonian. Only the resonant case is supported; the
/// level energies and drive frequency are carried as metadata.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub t_r: f64,
    pub omega_r: f64,
    pub levels: Option<(f64, f64)>,
    pub drive_omega: Option<f64>,
}

impl Default for HamiltonianSpec {
    fn default() -> Self {
        HamiltonianSpec {
            t_r: 1.0,
            omega_r: 2.0 * PI,
            levels: None,
            drive_omega: None,
        }
    }
}

impl HamiltonianSpec {
    /// Rejects a non-positive Rabi period and any drive that is off resonance
    /// with the level splitting (`ω = a2 − a1`, `ħ = 1`).
    pub fn new(t_r: f64, levels: Option<(f64, f64)>, drive_omega: Option<f64>) -> Result<Self> {
        if !(t_r > 0.0 && t_r.is_finite()) {
            return Err(Error::ParameterDomain {
                name: "t_r",
                value: t_r,
                expected: "> 0",
            });
        }
        if let (Some((a1, a2)), Some(omega)) = (levels, drive_omega) {
            let splitting = a2 - a1;
            if (omega - splitting).abs() > RESONANCE_TOLERANCE * splitting.abs().max(1.0) {
                return Err(Error::InvalidConfig {
                    field: "drive_omega",
                    reason: format!(
                        "drive at {omega} is off resonance with the level splitting {splitting}"
                    ),
                });
            }
        }
        Ok(HamiltonianSpec {
            t_r,
            omega_r: 2.0 * PI / t_r,
            levels,
            drive_omega,
        })
    }

    /// Rotation angle `πτ/T_R` accumulated over `tau`.
    fn half_angle(&self, tau: f64) -> f64 {
        PI * tau / self.t_r
    }
}

/// `U(τ) = exp(−iH_Iτ/ħ)`.
pub fn propagator(tau: f64, spec: &HamiltonianSpec) -> Mat2 {
    let a = spec.half_angle(tau);
    let (s, c) = a.sin_cos();
    let diag = Complex64::new(c, 0.0);
    let off = Complex64::new(0.0, -s);
    Mat2([[diag, off], [off, diag]])
}

pub fn evolve(state: &StateVector, tau: f64, spec: &HamiltonianSpec) -> StateVector {
    propagator(tau, spec).apply(state)
}

/// Largest entry of `[M, U(τ)] − (u1 − u2)·sin(πτ/T_R)·σ_y`.
pub fn commutator_residual(op: &Operation, tau: f64, spec: &HamiltonianSpec) -> f64 {
    let m = Mat2::from(*op);
    let u = propagator(tau, spec);
    let commutator = m * u - u * m;
    let predicted = Mat2::sigma_y().scale(Complex64::new(
        (op.u1 - op.u2) * spec.half_angle(tau).sin(),
        0.0,
    ));
    (commutator - predicted).max_abs()
}

/// Largest entry of `[M, U(τ)]`.
pub fn commutator_norm(op: &Operation, tau: f64, spec: &HamiltonianSpec) -> f64 {
    let m = Mat2::from(*op);
    let u = propagator(tau, spec);
    (m * u - u * m).max_abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::povm::PovmParams;
    use approx::assert_abs_diff_eq;

    fn close(a: &Mat2, b: &Mat2, tol: f64) -> bool {
        (*a - *b).max_abs() <= tol
    }

    #[test]
    fn propagator_examples() {
        let spec = HamiltonianSpec::default();
        assert!(close(&propagator(0.0, &spec), &Mat2::identity(), 0.0));

        let half = propagator(0.5, &spec);
        let expected = Mat2::sigma_x().scale(Complex64::new(0.0, -1.0));
        assert!(close(&half, &expected, 1e-15));
        let flipped = half.apply(&StateVector::ground());
        assert_abs_diff_eq!(
            (flipped.c2 - Complex64::new(0.0, -1.0)).norm(),
            0.0,
            epsilon = 1e-15
        );

        let full = propagator(1.0, &spec);
        assert!(close(
            &full,
            &Mat2::identity().scale(Complex64::new(-1.0, 0.0)),
            1e-15
        ));
    }

    #[test]
    fn propagator_is_special_unitary() {
        let spec = HamiltonianSpec::default();
        for k in 0..50 {
            let tau = 0.037 * k as f64;
            let u = propagator(tau, &spec);
            assert!(close(&(u.dagger() * u), &Mat2::identity(), 1e-12));
            assert_abs_diff_eq!(
                (u.det() - Complex64::new(1.0, 0.0)).norm(),
                0.0,
                epsilon = 1e-12
            );
            let shifted = propagator(tau + 1.0, &spec);
            assert!(close(&shifted, &u.scale(Complex64::new(-1.0, 0.0)), 1e-12));
        }
    }

    #[test]
    fn evolve_follows_rabi_solution() {
        let spec = HamiltonianSpec::default();
        let quarter = evolve(&StateVector::ground(), 0.25, &spec);
        assert_abs_diff_eq!(quarter.p_excited(), 0.5, epsilon = 1e-12);
        for k in 0..200 {
            let t = 0.0173 * k as f64;
            let s = evolve(&StateVector::ground(), t, &spec);
            assert_abs_diff_eq!(s.p_excited(), (PI * t).sin().powi(2), epsilon = 1e-10);
            assert_abs_diff_eq!(s.norm_sqr(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn evolve_group_property() {
        let spec = HamiltonianSpec::default();
        let s = StateVector::from_angles(0.8, 2.1);
        let two_step = evolve(&evolve(&s, 0.13, &spec), 0.29, &spec);
        let one_step = evolve(&s, 0.42, &spec);
        assert_abs_diff_eq!((two_step.c1 - one_step.c1).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!((two_step.c2 - one_step.c2).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn evolve_preserves_bloch_x() {
        let spec = HamiltonianSpec::default();
        let s = StateVector::from_angles(1.3, 0.9);
        let x0 = s.bloch_vector()[0];
        for k in 1..20 {
            let x = evolve(&s, 0.05 * k as f64, &spec).bloch_vector()[0];
            assert_abs_diff_eq!(x, x0, epsilon = 1e-12);
        }
    }

    #[test]
    fn commutator_examples() {
        let spec = HamiltonianSpec::default();
        let flat = Operation::new(0.7, 0.7).unwrap();
        assert_eq!(commutator_norm(&flat, 0.3, &spec), 0.0);
        let op = Operation::new(0.9, 0.2).unwrap();
        assert_eq!(commutator_norm(&op, 0.0, &spec), 0.0);

        let plus = PovmParams::new(0.46, 0.54).unwrap().operations().0;
        assert!(commutator_residual(&plus, 0.002, &spec) <= 1e-12);
        let norm = commutator_norm(&plus, 0.002, &spec);
        assert_abs_diff_eq!(norm, 3.557e-4, epsilon = 1e-6);
        assert_abs_diff_eq!(
            norm,
            (plus.u1 - plus.u2).abs() * (PI * 0.002).sin(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn off_resonant_drive_rejected() {
        assert!(HamiltonianSpec::new(1.0, Some((0.0, 3.0)), Some(3.0)).is_ok());
        assert!(matches!(
            HamiltonianSpec::new(1.0, Some((0.0, 3.0)), Some(3.5)),
            Err(Error::InvalidConfig {
                field: "drive_omega",
                ..
            })
        ));
        assert!(HamiltonianSpec::new(0.0, None, None).is_err());
        let spec = HamiltonianSpec::new(2.0, None, None).unwrap();
        assert_abs_diff_eq!(spec.omega_r * spec.t_r, 2.0 * PI, epsilon = 1e-12);
    }
}
