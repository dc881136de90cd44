//! Two-level Schrodinger dynamics i d(psi)/dt = H(t) psi with
//! H(t) = -(1/2) B(t) . sigma.
//!
//! Also carries the second-order reduction probe: in the z-drive layout each
//! spinor component separately satisfies
//! d2(psi)/dt2 + (s i df/dt + f^2 + epsilon^2) psi = 0 with s = +1 for the
//! first component and s = -1 for the second, and the probe evaluates that
//! left-hand side for any candidate function.

use num_complex::Complex64;
use thiserror::Error;

use crate::fields::FieldConfiguration;
use crate::ode::{self, OdeSolution};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error("tolerance {0:.3e} outside the supported range (1e-14, 1e-3)")]
    ToleranceOutOfRange(f64),
    #[error("coupling epsilon is zero; the second component cannot be restored")]
    DegenerateCoupling,
    #[error(transparent)]
    Integration(#[from] ode::OdeError),
}

pub(crate) fn check_tolerance(tol: f64) -> Result<(), QuantumError> {
    if tol > 1e-14 && tol < 1e-3 {
        Ok(())
    } else {
        Err(QuantumError::ToleranceOutOfRange(tol))
    }
}

/// A two-component complex state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spinor {
    pub psi1: Complex64,
    pub psi2: Complex64,
}

impl Spinor {
    pub fn new(psi1: Complex64, psi2: Complex64) -> Self {
        Spinor { psi1, psi2 }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.psi1.norm_sqr() + self.psi2.norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// The same ray rescaled to unit norm; useful before projecting a
    /// numerically evolved state onto another representation.
    pub fn normalized(&self) -> Spinor {
        let n = self.norm();
        Spinor::new(self.psi1 / n, self.psi2 / n)
    }
}

/// H = -(1/2) B . sigma as a 2x2 complex matrix, rows indexed first.
pub fn hamiltonian_matrix(b: [f64; 3]) -> [[Complex64; 2]; 2] {
    let h11 = Complex64::new(-0.5 * b[2], 0.0);
    let h12 = Complex64::new(-0.5 * b[0], 0.5 * b[1]);
    [[h11, h12], [h12.conj(), -h11]]
}

fn apply_hamiltonian(b: [f64; 3], s: &Spinor) -> (Complex64, Complex64) {
    let h = hamiltonian_matrix(b);
    (
        h[0][0] * s.psi1 + h[0][1] * s.psi2,
        h[1][0] * s.psi1 + h[1][1] * s.psi2,
    )
}

fn pack(s: &Spinor) -> [f64; 4] {
    [s.psi1.re, s.psi1.im, s.psi2.re, s.psi2.im]
}

fn unpack(y: &[f64; 4]) -> Spinor {
    Spinor::new(Complex64::new(y[0], y[1]), Complex64::new(y[2], y[3]))
}

/// Dense numerical solution of the Schrodinger equation over a span.
pub struct SpinorTrajectory {
    /// Accepted step times, endpoints included, in integration order.
    pub times: Vec<f64>,
    /// States at `times`.
    pub states: Vec<Spinor>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// Largest deviation of the state norm from its initial value seen at
    /// the accepted steps.
    pub norm_drift: f64,
    sol: OdeSolution<4>,
}

impl SpinorTrajectory {
    /// Dense-output state at any time inside the solved span.
    pub fn eval(&self, t: f64) -> Spinor {
        unpack(&self.sol.eval(t))
    }

    pub fn sample(&self, ts: &[f64]) -> Vec<Spinor> {
        ts.iter().map(|&t| self.eval(t)).collect()
    }
}

/// Integrates i d(psi)/dt = H(t) psi from `t0` to `t1` (either direction).
pub fn evolve_schrodinger(
    cfg: &FieldConfiguration,
    psi0: Spinor,
    t0: f64,
    t1: f64,
    tol: f64,
) -> Result<SpinorTrajectory, QuantumError> {
    check_tolerance(tol)?;
    let rhs = move |t: f64, y: &[f64; 4]| {
        let s = unpack(y);
        let (h1, h2) = apply_hamiltonian(cfg.field_at(t), &s);
        let d1 = -Complex64::i() * h1;
        let d2 = -Complex64::i() * h2;
        [d1.re, d1.im, d2.re, d2.im]
    };
    let sol = ode::integrate(&rhs, t0, t1, pack(&psi0), tol)?;
    let times = sol.step_times();
    let states: Vec<Spinor> = times.iter().map(|&t| unpack(&sol.eval(t))).collect();
    let n0 = psi0.norm();
    let norm_drift = states
        .iter()
        .map(|s| (s.norm() - n0).abs())
        .fold(0.0, f64::max);
    Ok(SpinorTrajectory {
        times,
        states,
        accepted_steps: sol.accepted,
        rejected_steps: sol.rejected,
        norm_drift,
        sol,
    })
}

/// Rebuilds the second component from the first and its time derivative in
/// the z-drive layout, where i d(psi1)/dt = f psi1 + epsilon psi2.
pub fn restore_psi2(
    psi1: Complex64,
    dpsi1: Complex64,
    f: f64,
    epsilon: f64,
) -> Result<Complex64, QuantumError> {
    if epsilon == 0.0 {
        return Err(QuantumError::DegenerateCoupling);
    }
    Ok((Complex64::i() * dpsi1 - f * psi1) / epsilon)
}

/// Which decoupled component equation the residual refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentEq {
    /// s = +1: the first-component equation.
    First,
    /// s = -1: the second-component equation.
    Second,
}

/// A candidate solution handed to [`second_order_residual`].
pub enum ResidualProbe<'a> {
    /// Values only; second derivatives are taken by fourth-order central
    /// differences.
    Sampled(&'a dyn Fn(f64) -> Complex64),
    /// Value, first, and second derivative supplied in closed form.
    Analytic(&'a dyn Fn(f64) -> (Complex64, Complex64, Complex64)),
}

/// Evaluates d2(psi)/dt2 + (s i df/dt + f^2 + epsilon^2) psi at `t` for the
/// z-drive layout. Zero (to probe accuracy) exactly when the candidate solves
/// the decoupled component equation.
pub fn second_order_residual(
    probe: &ResidualProbe,
    cfg: &FieldConfiguration,
    t: f64,
    component: ComponentEq,
) -> Complex64 {
    let (psi, dd) = match probe {
        ResidualProbe::Analytic(g) => {
            let (v, _, a) = g(t);
            (v, a)
        }
        ResidualProbe::Sampled(g) => {
            let h = f64::EPSILON.powf(0.2) * t.abs().max(1.0);
            let num = -g(t + 2.0 * h) + 16.0 * g(t + h) - 30.0 * g(t) + 16.0 * g(t - h)
                - g(t - 2.0 * h);
            (g(t), num / (12.0 * h * h))
        }
    };
    let s = match component {
        ComponentEq::First => 1.0,
        ComponentEq::Second => -1.0,
    };
    let f = cfg.drive(t);
    let df = cfg.drive_derivative(t);
    let eps = cfg.epsilon;
    dd + (Complex64::new(0.0, s * df) + f * f + eps * eps) * psi
}
