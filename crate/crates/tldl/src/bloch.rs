//! Bloch-vector representation: the map between spinors, density matrices,
//! and polarization vectors, and the precession flow dQ/dt = -Omega ^ Q.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fields::FieldConfiguration;
use crate::ode::{self, OdeSolution};
use crate::quantum::{check_tolerance, QuantumError, Spinor};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BlochError {
    #[error("spinor norm deviates from 1 by {0:.3e}")]
    NotNormalized(f64),
    #[error("polarization vector is not a pure state (|Q| off the sphere by {0:.3e})")]
    NotPure(f64),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Integration(#[from] ode::OdeError),
}

/// Polarization four-vector (Q0, Q1, Q2, Q3); pure states have Q0 = 1 and
/// |Q| = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochState {
    pub q0: f64,
    pub q: [f64; 3],
}

const NORM_TOL: f64 = 1e-12;
const PURITY_TOL: f64 = 1e-9;

/// rho = psi psi^dagger for a normalized spinor.
pub fn density_from_spinor(s: &Spinor) -> Result<[[Complex64; 2]; 2], BlochError> {
    let dev = (s.norm_sqr() - 1.0).abs();
    if dev > NORM_TOL {
        return Err(BlochError::NotNormalized(dev));
    }
    Ok([
        [s.psi1 * s.psi1.conj(), s.psi1 * s.psi2.conj()],
        [s.psi2 * s.psi1.conj(), s.psi2 * s.psi2.conj()],
    ])
}

/// Q1 = 2 Re(psi1 psi2*), Q2 = i(psi1 psi2* - psi2 psi1*),
/// Q3 = |psi1|^2 - |psi2|^2.
pub fn bloch_from_spinor(s: &Spinor) -> Result<BlochState, BlochError> {
    let q0 = s.norm_sqr();
    let dev = (q0 - 1.0).abs();
    if dev > NORM_TOL {
        return Err(BlochError::NotNormalized(dev));
    }
    let w = s.psi1 * s.psi2.conj();
    Ok(BlochState {
        q0,
        q: [2.0 * w.re, -2.0 * w.im, s.psi1.norm_sqr() - s.psi2.norm_sqr()],
    })
}

/// Inverse of [`bloch_from_spinor`] with the phase fixed so the first
/// component is real and nonnegative; at the south pole the result is (0, 1).
pub fn spinor_from_bloch(b: &BlochState) -> Result<Spinor, BlochError> {
    let radius = (b.q[0] * b.q[0] + b.q[1] * b.q[1] + b.q[2] * b.q[2]).sqrt();
    let dev = (radius - 1.0).abs().max((b.q0 - 1.0).abs());
    if dev > PURITY_TOL {
        return Err(BlochError::NotPure(dev));
    }
    let p1 = (0.5 * (1.0 + b.q[2])).max(0.0).sqrt();
    if p1 < 1e-12 {
        return Ok(Spinor::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)));
    }
    let psi2 = Complex64::new(b.q[0], b.q[1]) / (2.0 * p1);
    Ok(Spinor::new(Complex64::new(p1, 0.0), psi2))
}

/// Numerical solution of the precession equation over a span.
pub struct BlochTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<[f64; 3]>,
    /// Q0 is conserved by the flow and carried through unchanged.
    pub q0: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// Largest deviation of |Q| from its initial value at the accepted steps.
    pub radius_drift: f64,
    sol: OdeSolution<3>,
}

impl BlochTrajectory {
    pub fn eval(&self, t: f64) -> [f64; 3] {
        self.sol.eval(t)
    }

    pub fn sample(&self, ts: &[f64]) -> Vec<[f64; 3]> {
        self.sol.sample(ts)
    }
}

/// Integrates dQ/dt = -Omega(t) ^ Q with Omega the field vector.
pub fn evolve_bloch(
    cfg: &FieldConfiguration,
    state: &BlochState,
    t0: f64,
    t1: f64,
    tol: f64,
) -> Result<BlochTrajectory, BlochError> {
    check_tolerance(tol)?;
    let rhs = move |t: f64, q: &[f64; 3]| {
        let w = cfg.omega_vector(t);
        [
            -(w[1] * q[2] - w[2] * q[1]),
            -(w[2] * q[0] - w[0] * q[2]),
            -(w[0] * q[1] - w[1] * q[0]),
        ]
    };
    let sol = ode::integrate(&rhs, t0, t1, state.q, tol)?;
    let times = sol.step_times();
    let states: Vec<[f64; 3]> = times.iter().map(|&t| sol.eval(t)).collect();
    let r0 = (state.q[0] * state.q[0] + state.q[1] * state.q[1] + state.q[2] * state.q[2]).sqrt();
    let radius_drift = states
        .iter()
        .map(|q| ((q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt() - r0).abs())
        .fold(0.0, f64::max);
    Ok(BlochTrajectory {
        times,
        states,
        q0: state.q0,
        accepted_steps: sol.accepted,
        rejected_steps: sol.rejected,
        radius_drift,
        sol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{DriveProfile, Layout};
    use crate::quantum::evolve_schrodinger;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn poles_and_equator_map_as_expected() {
        let up = Spinor::new(c(1.0, 0.0), c(0.0, 0.0));
        let b = bloch_from_spinor(&up).unwrap();
        assert_eq!(b.q, [0.0, 0.0, 1.0]);
        assert_eq!(b.q0, 1.0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let eq = Spinor::new(c(s, 0.0), c(s, 0.0));
        let be = bloch_from_spinor(&eq).unwrap();
        assert!((be.q[0] - 1.0).abs() < 1e-15 && be.q[1].abs() < 1e-15 && be.q[2].abs() < 1e-15);
    }

    #[test]
    fn density_matrix_has_unit_trace_and_matches_bloch() {
        let s = Spinor::new(c(0.6, 0.0), c(0.0, 0.8));
        let rho = density_from_spinor(&s).unwrap();
        assert!(((rho[0][0] + rho[1][1]).re - 1.0).abs() < 1e-15);
        let b = bloch_from_spinor(&s).unwrap();
        assert!((2.0 * rho[0][1].re - b.q[0]).abs() < 1e-15);
        assert!((-2.0 * rho[0][1].im - b.q[1]).abs() < 1e-15);
        assert!(((rho[0][0] - rho[1][1]).re - b.q[2]).abs() < 1e-15);
    }

    #[test]
    fn south_pole_inverts_exactly() {
        let s = spinor_from_bloch(&BlochState { q0: 1.0, q: [0.0, 0.0, -1.0] }).unwrap();
        assert_eq!(s.psi1, c(0.0, 0.0));
        assert_eq!(s.psi2, c(1.0, 0.0));
    }

    #[test]
    fn round_trip_over_random_pure_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..1000 {
            let z = rng.gen_range(-1.0..1.0f64);
            let phi = rng.gen_range(0.0..std::f64::consts::TAU);
            let r = (1.0 - z * z).sqrt();
            let b = BlochState { q0: 1.0, q: [r * phi.cos(), r * phi.sin(), z] };
            let s = spinor_from_bloch(&b).unwrap();
            assert!((s.norm() - 1.0).abs() < 1e-12);
            let back = bloch_from_spinor(&s).unwrap();
            for i in 0..3 {
                assert!((back.q[i] - b.q[i]).abs() < 1e-12, "axis {i}");
            }
        }
    }

    #[test]
    fn spinor_round_trip_up_to_global_phase() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..200 {
            let raw = Spinor::new(
                c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            );
            let n = raw.norm();
            if n < 0.1 {
                continue;
            }
            let s = Spinor::new(raw.psi1 / n, raw.psi2 / n);
            let back = spinor_from_bloch(&bloch_from_spinor(&s).unwrap()).unwrap();
            let overlap = (s.psi1.conj() * back.psi1 + s.psi2.conj() * back.psi2).norm();
            assert!((overlap - 1.0).abs() < 1e-12, "overlap {overlap}");
        }
    }

    #[test]
    fn impure_and_unnormalized_inputs_are_rejected() {
        let err = spinor_from_bloch(&BlochState { q0: 1.0, q: [0.5, 0.0, 0.0] }).unwrap_err();
        assert!(matches!(err, BlochError::NotPure(_)));
        let err2 = bloch_from_spinor(&Spinor::new(c(0.9, 0.0), c(0.0, 0.0))).unwrap_err();
        assert!(matches!(err2, BlochError::NotNormalized(_)));
    }

    #[test]
    fn precession_about_a_constant_field() {
        let cfg = FieldConfiguration {
            epsilon: 0.0,
            layout: Layout::ZDrive,
            profile: DriveProfile::Constant { f0: 0.5 },
        };
        let b0 = BlochState { q0: 1.0, q: [1.0, 0.0, 0.0] };
        let traj = evolve_bloch(&cfg, &b0, 0.0, std::f64::consts::PI, 1e-12).unwrap();
        let half = traj.eval(std::f64::consts::FRAC_PI_2);
        assert!((half[0]).abs() < 1e-10 && (half[1] - 1.0).abs() < 1e-10);
        let end = traj.eval(std::f64::consts::PI);
        assert!((end[0] + 1.0).abs() < 1e-10 && end[1].abs() < 1e-10);
        assert!(traj.radius_drift < 1e-11);
    }

    #[test]
    fn bloch_flow_matches_schrodinger_flow() {
        let cfg = FieldConfiguration {
            epsilon: 1.0,
            layout: Layout::ZDrive,
            profile: DriveProfile::Tanh { f0: 1.0, f1: 1.0, t_scale: 1.0 },
        };
        let psi0 = Spinor::new(c(0.6, 0.0), c(0.48, 0.64));
        let q0 = bloch_from_spinor(&psi0).unwrap();
        let tq = evolve_schrodinger(&cfg, psi0, -6.0, 6.0, 1e-11).unwrap();
        let tb = evolve_bloch(&cfg, &q0, -6.0, 6.0, 1e-11).unwrap();
        for k in 0..=60 {
            let t = -6.0 + 0.2 * k as f64;
            let from_psi = bloch_from_spinor(&tq.eval(t).normalized()).unwrap();
            let direct = tb.eval(t);
            for i in 0..3 {
                assert!(
                    (from_psi.q[i] - direct[i]).abs() < 1e-8,
                    "axis {i} at t={t}: {} vs {}",
                    from_psi.q[i],
                    direct[i]
                );
            }
        }
    }
}
