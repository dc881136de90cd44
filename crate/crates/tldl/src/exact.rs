//! Closed-form solutions of the two-level problem in the z-drive layout,
//! where H = [[f(t), epsilon], [epsilon, -f(t)]].
//!
//! Three drive shapes admit exact first components psi1(t):
//! a constant drive (trigonometric), a tanh step, and a sech pulse, the
//! latter two through Gauss hypergeometric functions of a mapped variable
//! z(t). The second component follows from
//! psi2 = (i d(psi1)/dt - f psi1) / epsilon.
//!
//! The tanh map z = (1 + tanh(t/T))/2 stays inside (0, 1); the sech map
//! z = 2 / (1 - i sinh(t/T)) runs along a complex circle that crosses the
//! branch cut of 2F1 at z = 2, so its evaluation continues the function
//! across the cut on the sheet the path selects.

use num_complex::Complex64;
use thiserror::Error;

use crate::bloch::BlochState;
use crate::quantum::{restore_psi2, QuantumError, Spinor};
use crate::special::{
    gamma_ratio, hyp2f1, hyp2f1_continued, hyp2f1_derivative, HypParams, SpecialError,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExactError {
    #[error("incoming frequency vanishes; the asymptotic basis is degenerate")]
    DegenerateFrequency,
    #[error(transparent)]
    Special(#[from] SpecialError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

const I: Complex64 = Complex64::new(0.0, 1.0);

// ---------------------------------------------------------------------------
// Constant drive
// ---------------------------------------------------------------------------

/// Exact solution for a constant drive f and coupling epsilon.
///
/// With omega = sqrt(f^2 + epsilon^2) and the mixing angle gamma fixed by
/// 2 gamma = atan2(epsilon, f), the modes e^{+i omega t} and e^{-i omega t}
/// carry the energy -omega and +omega eigenvectors; `c_p` and `c_q` weight
/// them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantFieldSolution {
    pub epsilon: f64,
    pub f: f64,
    pub omega: f64,
    pub gamma: f64,
    pub c_p: Complex64,
    pub c_q: Complex64,
}

impl ConstantFieldSolution {
    pub fn new(epsilon: f64, f: f64, c_p: Complex64, c_q: Complex64) -> Self {
        let omega = f.hypot(epsilon);
        let gamma = 0.5 * epsilon.atan2(f);
        ConstantFieldSolution { epsilon, f, omega, gamma, c_p, c_q }
    }
}

/// The spinor at time t for a constant drive.
pub fn constant_solution(sol: &ConstantFieldSolution, t: f64) -> Spinor {
    let (s, c) = sol.gamma.sin_cos();
    let ep = (I * sol.omega * t).exp();
    let em = ep.conj();
    Spinor::new(
        sol.c_p * s * ep + sol.c_q * c * em,
        -sol.c_p * c * ep + sol.c_q * s * em,
    )
}

/// Polarization components of the constant-drive solution in closed form:
/// with phase psi_hat = omega t + phi0, 2 phi0 = arg(c_p conj(c_q)), and
/// r = |c_p c_q|,
/// Q1 = sin(2 gamma)(|c_q|^2 - |c_p|^2) - 2 r cos(2 gamma) cos(2 psi_hat),
/// Q2 = -2 r sin(2 psi_hat),
/// Q3 = cos(2 gamma)(|c_q|^2 - |c_p|^2) + 2 r sin(2 gamma) cos(2 psi_hat).
pub fn constant_q_components(sol: &ConstantFieldSolution, t: f64) -> BlochState {
    let pq = sol.c_p * sol.c_q.conj();
    let r = pq.norm();
    let two_psi = 2.0 * sol.omega * t + pq.arg();
    let (s2g, c2g) = (2.0 * sol.gamma).sin_cos();
    let dq = sol.c_q.norm_sqr() - sol.c_p.norm_sqr();
    BlochState {
        q0: sol.c_p.norm_sqr() + sol.c_q.norm_sqr(),
        q: [
            s2g * dq - 2.0 * r * c2g * two_psi.cos(),
            -2.0 * r * two_psi.sin(),
            c2g * dq + 2.0 * r * s2g * two_psi.cos(),
        ],
    }
}

// ---------------------------------------------------------------------------
// Shared hypergeometric scaffolding
// ---------------------------------------------------------------------------

/// phi = pow * F and its first two z-derivatives, where pow = (1-z)^nu z^m is
/// supplied already evaluated (so the caller controls the branch) and
/// F = 2F1(p; z).
fn power_times_f_derivs(
    p: &HypParams,
    m: Complex64,
    nu: Complex64,
    z: Complex64,
    omz: Complex64,
    pow: Complex64,
    f: Complex64,
    fp: Complex64,
) -> (Complex64, Complex64, Complex64) {
    let fpp = (p.alpha * p.beta * f - (p.gamma - (p.alpha + p.beta + 1.0) * z) * fp) / (z * omz);
    let l = m / z - nu / omz;
    let dl = -m / (z * z) - nu / (omz * omz);
    let phi = pow * f;
    let dphi = pow * (l * f + fp);
    let ddphi = pow * ((l * l + dl) * f + 2.0 * l * fp + fpp);
    (phi, dphi, ddphi)
}

// ---------------------------------------------------------------------------
// Tanh step
// ---------------------------------------------------------------------------

/// Closed-form solution parameters for the drive f(t) = f0 tanh(t/T) + f1.
///
/// In units of T: a = T f0, b = T f1, e = epsilon T. The asymptotic
/// frequencies are omega_minus = sqrt(e^2 + (b-a)^2) on the incoming side and
/// omega_plus = sqrt(e^2 + (b+a)^2) on the outgoing side, with exponents
/// mu = i omega_minus / 2 and nu = i omega_plus / 2. `c1` and `c2` weight the
/// two basis functions, which behave as e^{+i omega_minus t/T} and
/// e^{-i omega_minus t/T} in the far past.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TanhSolutionParams {
    pub f0: f64,
    pub f1: f64,
    pub t_scale: f64,
    pub epsilon: f64,
    pub c1: Complex64,
    pub c2: Complex64,
}

impl TanhSolutionParams {
    pub fn a(&self) -> f64 {
        self.t_scale * self.f0
    }

    pub fn b(&self) -> f64 {
        self.t_scale * self.f1
    }

    pub fn e(&self) -> f64 {
        self.t_scale * self.epsilon
    }

    pub fn omega_minus(&self) -> f64 {
        self.e().hypot(self.b() - self.a())
    }

    pub fn omega_plus(&self) -> f64 {
        self.e().hypot(self.b() + self.a())
    }

    /// Incoming mixing angle: 2 gamma_minus = atan2(e, b - a).
    pub fn gamma_minus(&self) -> f64 {
        0.5 * self.e().atan2(self.b() - self.a())
    }

    /// Outgoing mixing angle: 2 gamma_plus = atan2(e, b + a).
    pub fn gamma_plus(&self) -> f64 {
        0.5 * self.e().atan2(self.b() + self.a())
    }

    fn mu(&self) -> Complex64 {
        c64(0.0, 0.5 * self.omega_minus())
    }

    fn nu(&self) -> Complex64 {
        c64(0.0, 0.5 * self.omega_plus())
    }

    fn hyp_params(&self, m: Complex64) -> HypParams {
        let ia = c64(0.0, self.a());
        HypParams {
            alpha: m + self.nu() + 1.0 + ia,
            beta: m + self.nu() - ia,
            gamma: 1.0 + 2.0 * m,
        }
    }
}

fn tanh_basis_derivs(
    p: &TanhSolutionParams,
    sign: f64,
    t: f64,
) -> Result<(Complex64, Complex64, Complex64), ExactError> {
    let tau = t / p.t_scale;
    let z = 1.0 / (1.0 + (-2.0 * tau).exp());
    let omz = 1.0 / (1.0 + (2.0 * tau).exp());
    let m = sign * p.mu();
    let nu = p.nu();
    let hp = p.hyp_params(m);
    let zc = c64(z, 0.0);
    let omzc = c64(omz, 0.0);
    let pow = (nu * omz.ln() + m * z.ln()).exp();
    let f = hyp2f1(&hp, zc)?;
    let fp = hyp2f1_derivative(&hp, zc)?;
    let (phi, dphi_dz, ddphi_dz) = power_times_f_derivs(&hp, m, nu, zc, omzc, pow, f, fp);
    let zdot = 2.0 * z * omz / p.t_scale;
    let zddot = 4.0 * z * omz * (1.0 - 2.0 * z) / (p.t_scale * p.t_scale);
    Ok((
        phi,
        dphi_dz * zdot,
        ddphi_dz * zdot * zdot + dphi_dz * zddot,
    ))
}

/// First component psi1(t) of the tanh-step solution.
pub fn tanh_solution(p: &TanhSolutionParams, t: f64) -> Result<Complex64, ExactError> {
    Ok(tanh_solution_with_derivatives(p, t)?.0)
}

/// psi1 together with its first and second time derivatives.
pub fn tanh_solution_with_derivatives(
    p: &TanhSolutionParams,
    t: f64,
) -> Result<(Complex64, Complex64, Complex64), ExactError> {
    let (up, dup, ddup) = tanh_basis_derivs(p, 1.0, t)?;
    let (um, dum, ddum) = tanh_basis_derivs(p, -1.0, t)?;
    Ok((
        p.c1 * up + p.c2 * um,
        p.c1 * dup + p.c2 * dum,
        p.c1 * ddup + p.c2 * ddum,
    ))
}

/// Full spinor of the tanh-step solution; requires epsilon != 0.
pub fn tanh_spinor(p: &TanhSolutionParams, t: f64) -> Result<Spinor, ExactError> {
    let (psi1, dpsi1, _) = tanh_solution_with_derivatives(p, t)?;
    let f = p.f0 * (t / p.t_scale).tanh() + p.f1;
    let psi2 = restore_psi2(psi1, dpsi1, f, p.epsilon)?;
    Ok(Spinor::new(psi1, psi2))
}

/// Basis weights (c1, c2) that realize the incoming state with amplitude
/// `c_p` on the lower and `c_q` on the upper energy eigenstate of the far
/// past. Fails when the incoming frequency omega_minus vanishes.
pub fn tanh_match_initial(
    f0: f64,
    f1: f64,
    t_scale: f64,
    epsilon: f64,
    c_p: Complex64,
    c_q: Complex64,
) -> Result<TanhSolutionParams, ExactError> {
    let probe = TanhSolutionParams {
        f0,
        f1,
        t_scale,
        epsilon,
        c1: c64(0.0, 0.0),
        c2: c64(0.0, 0.0),
    };
    if probe.omega_minus() == 0.0 {
        return Err(ExactError::DegenerateFrequency);
    }
    let g = probe.gamma_minus();
    Ok(TanhSolutionParams {
        c1: c_p * g.sin(),
        c2: c_q * g.cos(),
        ..probe
    })
}

/// Outgoing mode amplitudes: in the far future
/// psi1 ~ a_plus e^{+i omega_plus t/T} + a_minus e^{-i omega_plus t/T}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringAmplitudes {
    pub a_plus: Complex64,
    pub a_minus: Complex64,
}

/// Maps the basis weights of a tanh solution to its outgoing amplitudes
/// through the gamma-function connection coefficients.
pub fn tanh_out_amplitudes(p: &TanhSolutionParams) -> Result<ScatteringAmplitudes, ExactError> {
    let mu = p.mu();
    let ia = c64(0.0, p.a());
    let one = c64(1.0, 0.0);
    let amp = |nu: Complex64| -> Result<Complex64, ExactError> {
        let t1 = gamma_ratio(
            &[2.0 * nu, one + 2.0 * mu],
            &[one + mu + nu + ia, mu + nu - ia],
        )?;
        let t2 = gamma_ratio(
            &[2.0 * nu, one - 2.0 * mu],
            &[one - mu + nu + ia, -mu + nu - ia],
        )?;
        Ok(t1 * p.c1 + t2 * p.c2)
    };
    Ok(ScatteringAmplitudes {
        a_plus: amp(p.nu())?,
        a_minus: amp(-p.nu())?,
    })
}

// ---------------------------------------------------------------------------
// Sech pulse
// ---------------------------------------------------------------------------

/// Closed-form solution parameters for the drive f(t) = f0 / cosh(t/T).
///
/// The exponents are mu = i epsilon T and nu = -f0 T / 2, and the mapped
/// variable z = 2 / (1 - i sinh(t/T)) traces a circle with |1 - z| = 1,
/// crossing the branch cut of 2F1 at z = 2 when t = 0. `c1` and `c2` weight
/// the basis functions that behave as e^{+chi1} and e^{-chi1} in the far
/// past (see [`SechSolutionParams::chi1`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SechSolutionParams {
    pub f0: f64,
    pub t_scale: f64,
    pub epsilon: f64,
    pub c1: Complex64,
    pub c2: Complex64,
}

const SECH_ASYMPTOTIC_TAU: f64 = 19.0;
const SECH_PRINCIPAL_TAU: f64 = -2.0;
const SECH_ANCHOR_TAU: f64 = -2.5;

impl SechSolutionParams {
    pub fn e(&self) -> f64 {
        self.t_scale * self.epsilon
    }

    fn mu(&self) -> Complex64 {
        c64(0.0, self.e())
    }

    fn nu(&self) -> Complex64 {
        c64(-0.5 * self.f0 * self.t_scale, 0.0)
    }

    /// Incoming phase: chi1(t) = i epsilon t + (pi/2) epsilon T
    /// + i epsilon T ln 4.
    pub fn chi1(&self, t: f64) -> Complex64 {
        let e = self.e();
        c64(
            std::f64::consts::FRAC_PI_2 * e,
            self.epsilon * t + e * 4.0f64.ln(),
        )
    }

    /// Outgoing phase: chi2(t) = i epsilon t + (pi/2) epsilon T
    /// - i epsilon T ln 4.
    pub fn chi2(&self, t: f64) -> Complex64 {
        let e = self.e();
        c64(
            std::f64::consts::FRAC_PI_2 * e,
            self.epsilon * t - e * 4.0f64.ln(),
        )
    }

    fn hyp_params(&self, m: Complex64) -> HypParams {
        HypParams {
            alpha: m,
            beta: 0.5 + 2.0 * self.nu() + m,
            gamma: 1.0 + 2.0 * m,
        }
    }
}

fn sech_z(tau: f64) -> Complex64 {
    2.0 / Complex64::new(1.0, -tau.sinh())
}

/// Phase of (1 - z) along the sech path, increasing from 0 to 2 pi.
fn sech_cut_phase(tau: f64) -> f64 {
    4.0 * tau.exp().atan()
}

fn sech_continuation_path(tau: f64) -> Vec<Complex64> {
    let n = ((tau - SECH_ANCHOR_TAU) / 0.2).ceil().max(1.0) as usize;
    (0..=n)
        .map(|k| sech_z(SECH_ANCHOR_TAU + (tau - SECH_ANCHOR_TAU) * k as f64 / n as f64))
        .collect()
}

fn sech_basis_derivs(
    p: &SechSolutionParams,
    sign: f64,
    t: f64,
) -> Result<(Complex64, Complex64, Complex64), ExactError> {
    let tau = t / p.t_scale;
    let ts = p.t_scale;

    if tau <= -SECH_ASYMPTOTIC_TAU {
        let u = if sign > 0.0 { p.chi1(t).exp() } else { (-p.chi1(t)).exp() };
        let rate = c64(0.0, sign * p.epsilon);
        return Ok((u, rate * u, rate * rate * u));
    }
    if tau >= SECH_ASYMPTOTIC_TAU {
        let out = sech_out_asymptotics(p.f0, p.t_scale, p.epsilon)?;
        let col = if sign > 0.0 { [out.sigma[0][0], out.sigma[1][0]] } else { [out.sigma[0][1], out.sigma[1][1]] };
        let em = (-p.chi2(t)).exp();
        let ep = p.chi2(t).exp();
        let rate = c64(0.0, p.epsilon);
        let u = col[0] * em + col[1] * ep;
        let du = -rate * col[0] * em + rate * col[1] * ep;
        return Ok((u, du, rate * rate * u));
    }

    let m = sign * p.mu();
    let nu = p.nu();
    let hp = p.hyp_params(m);
    let z = sech_z(tau);
    let phase = sech_cut_phase(tau);
    let omz = (I * phase).exp();
    let pow = (I * nu * phase).exp() * (m * z.ln()).exp();

    let (f, fp) = if tau <= SECH_PRINCIPAL_TAU {
        (hyp2f1(&hp, z)?, hyp2f1_derivative(&hp, z)?)
    } else {
        hyp2f1_continued(&hp, &sech_continuation_path(tau))?
    };

    let (phi, dphi_dz, ddphi_dz) = power_times_f_derivs(&hp, m, nu, z, omz, pow, f, fp);
    let root = (I * 0.5 * phase).exp();
    let zdot_tau = z * root;
    let zddot_tau = root * (zdot_tau + I * z * 2.0 / tau.cosh() * 0.5);
    Ok((
        phi,
        dphi_dz * zdot_tau / ts,
        (ddphi_dz * zdot_tau * zdot_tau + dphi_dz * zddot_tau) / (ts * ts),
    ))
}

fn sech_check_nondegenerate(p: &SechSolutionParams) -> Result<(), ExactError> {
    if p.epsilon == 0.0 {
        return Err(ExactError::Special(SpecialError::GammaDegenerate));
    }
    Ok(())
}

/// The two basis functions (u_plus, u_minus) of the sech solution at time t.
pub fn sech_basis(p: &SechSolutionParams, t: f64) -> Result<(Complex64, Complex64), ExactError> {
    sech_check_nondegenerate(p)?;
    Ok((sech_basis_derivs(p, 1.0, t)?.0, sech_basis_derivs(p, -1.0, t)?.0))
}

/// First component psi1(t) of the sech-pulse solution.
pub fn sech_solution(p: &SechSolutionParams, t: f64) -> Result<Complex64, ExactError> {
    Ok(sech_solution_with_derivatives(p, t)?.0)
}

/// psi1 together with its first and second time derivatives.
pub fn sech_solution_with_derivatives(
    p: &SechSolutionParams,
    t: f64,
) -> Result<(Complex64, Complex64, Complex64), ExactError> {
    sech_check_nondegenerate(p)?;
    let (up, dup, ddup) = sech_basis_derivs(p, 1.0, t)?;
    let (um, dum, ddum) = sech_basis_derivs(p, -1.0, t)?;
    Ok((
        p.c1 * up + p.c2 * um,
        p.c1 * dup + p.c2 * dum,
        p.c1 * ddup + p.c2 * ddum,
    ))
}

/// Full spinor of the sech-pulse solution; requires epsilon != 0.
pub fn sech_spinor(p: &SechSolutionParams, t: f64) -> Result<Spinor, ExactError> {
    let (psi1, dpsi1, _) = sech_solution_with_derivatives(p, t)?;
    let f = p.f0 / (t / p.t_scale).cosh();
    let psi2 = restore_psi2(psi1, dpsi1, f, p.epsilon)?;
    Ok(Spinor::new(psi1, psi2))
}

/// Basis weights that realize the incoming state with amplitude `c_p` on the
/// lower and `c_q` on the upper energy eigenstate of the far past (mixing
/// angle pi/4, frequencies +-epsilon).
pub fn sech_match_initial(
    f0: f64,
    t_scale: f64,
    epsilon: f64,
    c_p: Complex64,
    c_q: Complex64,
) -> SechSolutionParams {
    let e = t_scale * epsilon;
    let half = std::f64::consts::FRAC_PI_2 * e;
    let ln4 = 4.0f64.ln();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    SechSolutionParams {
        f0,
        t_scale,
        epsilon,
        c1: c_p * s * (-half).exp() * (-I * e * ln4).exp(),
        c2: c_q * s * half.exp() * (I * e * ln4).exp(),
    }
}

/// Outgoing structure of the sech solution: in the far future the basis
/// weights (c1, c2) turn into (d1, d2) = sigma (c1, c2) on the modes
/// e^{-chi2} and e^{+chi2}. At epsilon = 0 the map reduces to
/// sigma_x e^{-i pi f0 T sigma_x}, a pure exchange with phase e^{-i pi f0 T}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SechOutAsymptotics {
    /// e^{-i pi f0 T}.
    pub exchange_phase: Complex64,
    /// Connection matrix acting on the basis weights.
    pub sigma: [[Complex64; 2]; 2],
}

impl SechOutAsymptotics {
    /// (d1, d2) = sigma (c1, c2).
    pub fn outgoing(&self, c1: Complex64, c2: Complex64) -> (Complex64, Complex64) {
        (
            self.sigma[0][0] * c1 + self.sigma[0][1] * c2,
            self.sigma[1][0] * c1 + self.sigma[1][1] * c2,
        )
    }
}

/// Builds the outgoing connection matrix in closed form:
/// with s = sin(pi f0 T) / cosh(pi epsilon T) and
/// g = Gamma(1/2 + i epsilon T)^2
///   / (Gamma(1/2 + i epsilon T + f0 T) Gamma(1/2 + i epsilon T - f0 T)),
/// sigma11 = -i s e^{+pi epsilon T}, sigma22 = -i s e^{-pi epsilon T},
/// sigma21 = g e^{+2 i epsilon T ln 4}, sigma12 = conj(sigma21), and
/// det sigma = -1.
pub fn sech_out_asymptotics(
    f0: f64,
    t_scale: f64,
    epsilon: f64,
) -> Result<SechOutAsymptotics, ExactError> {
    let e = t_scale * epsilon;
    let h = t_scale * f0;
    let pi = std::f64::consts::PI;
    let s = (pi * h).sin() / (pi * e).cosh();
    let half_ie = c64(0.5, e);
    let g = gamma_ratio(&[half_ie, half_ie], &[half_ie + h, half_ie - h])?;
    let twist = (I * 2.0 * e * 4.0f64.ln()).exp();
    let s21 = g * twist;
    Ok(SechOutAsymptotics {
        exchange_phase: (-I * pi * h).exp(),
        sigma: [
            [-I * s * (pi * e).exp(), s21.conj()],
            [s21, -I * s * (-pi * e).exp()],
        ],
    })
}

/// Outgoing energy-eigenstate amplitudes (lower, upper) of a sech solution,
/// normalized like the incoming (c_p, c_q) of [`sech_match_initial`].
pub fn sech_out_state_amplitudes(
    p: &SechSolutionParams,
) -> Result<(Complex64, Complex64), ExactError> {
    let out = sech_out_asymptotics(p.f0, p.t_scale, p.epsilon)?;
    let (d1, d2) = out.outgoing(p.c1, p.c2);
    let e = p.e();
    let half = std::f64::consts::FRAC_PI_2 * e;
    let ln4 = 4.0f64.ln();
    let rt2 = std::f64::consts::SQRT_2;
    let lower = d2 * rt2 * half.exp() * (-I * e * ln4).exp();
    let upper = d1 * rt2 * (-half).exp() * (I * e * ln4).exp();
    Ok((lower, upper))
}

// ---------------------------------------------------------------------------
// Transition probabilities
// ---------------------------------------------------------------------------

/// Which adiabatic eigenstate carries the incoming population.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InState {
    Lower,
    Upper,
}

/// A pulse for which scattering probabilities are defined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransitionScenario {
    Tanh { f0: f64, f1: f64, t_scale: f64, epsilon: f64 },
    Sech { f0: f64, t_scale: f64, epsilon: f64 },
}

/// Probability of ending in the opposite adiabatic eigenstate after the
/// pulse. Zero coupling freezes the populations, so epsilon = 0 gives 0, as
/// does a vanishing pulse amplitude f0 = 0.
pub fn transition_probability(
    sc: &TransitionScenario,
    in_state: InState,
) -> Result<f64, ExactError> {
    Ok(scattering_outcome(sc, in_state)?.0)
}

/// (transition, survival) probability pair; the two sum to one.
pub fn scattering_outcome(
    sc: &TransitionScenario,
    in_state: InState,
) -> Result<(f64, f64), ExactError> {
    let (epsilon, f0) = match sc {
        TransitionScenario::Tanh { epsilon, f0, .. } => (*epsilon, *f0),
        TransitionScenario::Sech { epsilon, f0, .. } => (*epsilon, *f0),
    };
    if epsilon == 0.0 || f0 == 0.0 {
        return Ok((0.0, 1.0));
    }
    let (p_in, q_in) = match in_state {
        InState::Lower => (c64(1.0, 0.0), c64(0.0, 0.0)),
        InState::Upper => (c64(0.0, 0.0), c64(1.0, 0.0)),
    };
    let (out_lower, out_upper) = match sc {
        TransitionScenario::Tanh { f0, f1, t_scale, epsilon } => {
            let params = tanh_match_initial(*f0, *f1, *t_scale, *epsilon, p_in, q_in)?;
            let amps = tanh_out_amplitudes(&params)?;
            let gp = params.gamma_plus();
            (amps.a_plus / gp.sin(), amps.a_minus / gp.cos())
        }
        TransitionScenario::Sech { f0, t_scale, epsilon } => {
            let params = sech_match_initial(*f0, *t_scale, *epsilon, p_in, q_in);
            sech_out_state_amplitudes(&params)?
        }
    };
    let (p_low, p_up) = (out_lower.norm_sqr(), out_upper.norm_sqr());
    Ok(match in_state {
        InState::Lower => (p_up, p_low),
        InState::Upper => (p_low, p_up),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::bloch_from_spinor;
    use crate::fields::{DriveProfile, FieldConfiguration, Layout};
    use crate::quantum::{
        evolve_schrodinger, second_order_residual, ComponentEq, ResidualProbe,
    };
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn assert_close(got: Complex64, want: Complex64, tol: f64, label: &str) {
        let d = (got - want).norm();
        assert!(d <= tol, "{label}: got {got}, want {want}, |diff| = {d:.3e}");
    }

    #[test]
    fn constant_solution_solves_schrodinger() {
        let sol = ConstantFieldSolution::new(0.8, 0.6, c64(0.5, 0.2), c64(-0.3, 0.7));
        let cfg = FieldConfiguration {
            epsilon: 0.8,
            layout: Layout::ZDrive,
            profile: DriveProfile::Constant { f0: 0.6 },
        };
        let start = constant_solution(&sol, -1.0);
        let traj = evolve_schrodinger(&cfg, start, -1.0, 3.0, 1e-12).unwrap();
        for &t in &[-0.4, 0.0, 1.3, 3.0] {
            let exact = constant_solution(&sol, t);
            let num = traj.eval(t);
            assert!((exact.psi1 - num.psi1).norm() < 1e-10, "psi1 at t={t}");
            assert!((exact.psi2 - num.psi2).norm() < 1e-10, "psi2 at t={t}");
        }
    }

    #[test]
    fn constant_q_components_match_spinor_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..50 {
            let raw_p = c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let raw_q = c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let n = (raw_p.norm_sqr() + raw_q.norm_sqr()).sqrt();
            if n < 0.1 {
                continue;
            }
            let sol = ConstantFieldSolution::new(
                rng.gen_range(0.1..2.0),
                rng.gen_range(-2.0..2.0),
                raw_p / n,
                raw_q / n,
            );
            let t = rng.gen_range(-3.0..3.0);
            let q = constant_q_components(&sol, t);
            let from_spinor = bloch_from_spinor(&constant_solution(&sol, t)).unwrap();
            assert!((q.q0 - 1.0).abs() < 1e-12);
            for i in 0..3 {
                assert!(
                    (q.q[i] - from_spinor.q[i]).abs() < 1e-12,
                    "component {i}: {} vs {}",
                    q.q[i],
                    from_spinor.q[i]
                );
            }
        }
    }

    #[test]
    fn stationary_upper_state_has_constant_polarization() {
        let sol = ConstantFieldSolution::new(1.0, 0.5, c64(0.0, 0.0), c64(1.0, 0.0));
        let g2 = 2.0 * sol.gamma;
        for &t in &[0.0, 0.7, 2.9] {
            let q = constant_q_components(&sol, t);
            assert!((q.q[0] - g2.sin()).abs() < 1e-14);
            assert!(q.q[1].abs() < 1e-14);
            assert!((q.q[2] - g2.cos()).abs() < 1e-14);
        }
    }

    fn tanh_unit_params() -> TanhSolutionParams {
        TanhSolutionParams {
            f0: 1.0,
            f1: 0.5,
            t_scale: 1.0,
            epsilon: 1.0,
            c1: c64(1.0, 0.0),
            c2: c64(0.0, 0.0),
        }
    }

    #[test]
    fn tanh_basis_matches_frozen_values() {
        let mut p = tanh_unit_params();
        let plus = [
            (-2.0, c64(-0.62394331475632573, -0.77502228905882575)),
            (0.0, c64(0.67363011418416225, -0.31599523028268675)),
            (1.7, c64(-0.53348445655431045, 0.24470435466681320)),
        ];
        for (t, want) in plus {
            assert_close(tanh_solution(&p, t).unwrap(), want, 1e-10, &format!("u+ at {t}"));
        }
        p.c1 = c64(0.0, 0.0);
        p.c2 = c64(1.0, 0.0);
        let minus = [
            (-2.0, c64(-0.62252267611829607, 0.79921085451429915)),
            (0.0, c64(1.4664460992655698, -0.13470826932126621)),
            (1.7, c64(-1.3162828008189488, -0.99174483477979638)),
        ];
        for (t, want) in minus {
            assert_close(tanh_solution(&p, t).unwrap(), want, 1e-10, &format!("u- at {t}"));
        }
    }

    #[test]
    fn tanh_solution_satisfies_second_order_equation() {
        let p = TanhSolutionParams {
            c1: c64(0.3, 0.4),
            c2: c64(-0.2, 0.1),
            ..tanh_unit_params()
        };
        let cfg = FieldConfiguration {
            epsilon: p.epsilon,
            layout: Layout::ZDrive,
            profile: DriveProfile::Tanh { f0: p.f0, f1: p.f1, t_scale: p.t_scale },
        };
        let probe = |t: f64| tanh_solution_with_derivatives(&p, t).unwrap();
        for k in -10..=10 {
            let t = 0.5 * k as f64;
            let r = second_order_residual(
                &ResidualProbe::Analytic(&probe),
                &cfg,
                t,
                ComponentEq::First,
            );
            assert!(r.norm() < 1e-10, "residual {:.3e} at t={t}", r.norm());
        }
    }

    #[test]
    fn tanh_spinor_matches_numerical_evolution() {
        let p = TanhSolutionParams {
            c1: c64(0.6, -0.1),
            c2: c64(0.2, 0.5),
            ..tanh_unit_params()
        };
        let cfg = FieldConfiguration {
            epsilon: 1.0,
            layout: Layout::ZDrive,
            profile: DriveProfile::Tanh { f0: 1.0, f1: 0.5, t_scale: 1.0 },
        };
        let start = tanh_spinor(&p, -6.0).unwrap();
        let traj = evolve_schrodinger(&cfg, start, -6.0, 6.0, 1e-12).unwrap();
        for &t in &[-3.0, 0.0, 2.0, 6.0] {
            let exact = tanh_spinor(&p, t).unwrap();
            let num = traj.eval(t);
            assert!(
                (exact.psi1 - num.psi1).norm() < 1e-9,
                "psi1 at t={t}: diff {:.3e}",
                (exact.psi1 - num.psi1).norm()
            );
            assert!((exact.psi2 - num.psi2).norm() < 1e-9, "psi2 at t={t}");
        }
    }

    #[test]
    fn tanh_matching_reproduces_incoming_wave() {
        let f0 = 1.0;
        let f1 = 0.5;
        let eps = 1.0;
        let p = tanh_match_initial(f0, f1, 1.0, eps, c64(0.7, 0.1), c64(-0.3, 0.5)).unwrap();
        let g = p.gamma_minus();
        let w = p.omega_minus();
        for &t in &[-14.0, -16.0] {
            let asym = c64(0.7, 0.1) * g.sin() * (I * w * t).exp()
                + c64(-0.3, 0.5) * g.cos() * (-I * w * t).exp();
            assert_close(tanh_solution(&p, t).unwrap(), asym, 1e-9, &format!("t={t}"));
        }
    }

    #[test]
    fn tanh_out_amplitudes_match_frozen_values() {
        let base = tanh_unit_params();
        let cases: [(Complex64, Complex64, Complex64, Complex64); 3] = [
            (
                c64(1.0, 0.0),
                c64(0.0, 0.0),
                c64(0.28021090222040619, -0.17663405028109934),
                c64(0.25630951801537833, -0.058173031727081125),
            ),
            (
                c64(0.0, 0.0),
                c64(1.0, 0.0),
                c64(-0.12556635911053613, -0.028499042286650521),
                c64(1.4974479690873103, 0.94393293683144921),
            ),
            (
                c64(0.3, 0.4),
                c64(-0.2, 0.1),
                c64(0.18268006682933387, 0.052237318350109163),
                c64(-0.29372081940516104, 0.046030107230468185),
            ),
        ];
        for (c1, c2, want_p, want_m) in cases {
            let p = TanhSolutionParams { c1, c2, ..base };
            let amps = tanh_out_amplitudes(&p).unwrap();
            assert_close(amps.a_plus, want_p, 1e-9, "A+");
            assert_close(amps.a_minus, want_m, 1e-9, "A-");
        }
        let steep = TanhSolutionParams {
            f0: 0.5,
            f1: 2.0,
            t_scale: 1.0,
            epsilon: 2.0,
            c1: c64(0.7, 0.0),
            c2: c64(0.0, 0.7),
        };
        let amps = tanh_out_amplitudes(&steep).unwrap();
        assert_close(
            amps.a_plus,
            c64(0.51771136512341488, -0.022805492557490289),
            1e-9,
            "A+ steep",
        );
        assert_close(
            amps.a_minus,
            c64(-0.031997391625638522, 0.73720948791899239),
            1e-9,
            "A- steep",
        );
    }

    #[test]
    fn tanh_amplitudes_reduce_to_weights_without_step() {
        let p = TanhSolutionParams {
            f0: 0.0,
            f1: 0.8,
            t_scale: 1.0,
            epsilon: 0.9,
            c1: c64(0.3, -0.2),
            c2: c64(0.5, 0.1),
        };
        let amps = tanh_out_amplitudes(&p).unwrap();
        assert_close(amps.a_plus, p.c1, 1e-12, "A+ = c1");
        assert_close(amps.a_minus, p.c2, 1e-12, "A- = c2");
    }

    #[test]
    fn tanh_step_vanishing_amplitude_is_continuous() {
        let small = tanh_match_initial(1e-6, 0.5, 1.0, 1.0, c64(1.0, 0.0), c64(0.0, 0.0)).unwrap();
        let limit = ConstantFieldSolution::new(1.0, 0.5, c64(1.0, 0.0), c64(0.0, 0.0));
        for &t in &[-2.0, 0.0, 1.5] {
            let a = tanh_solution(&small, t).unwrap();
            let b = constant_solution(&limit, t).psi1;
            assert!((a - b).norm() < 1e-4, "continuity at t={t}: {:.3e}", (a - b).norm());
        }
    }

    #[test]
    fn tanh_degenerate_incoming_frequency_is_rejected() {
        let err = tanh_match_initial(1.0, 1.0, 1.0, 0.0, c64(1.0, 0.0), c64(0.0, 0.0))
            .unwrap_err();
        assert!(matches!(err, ExactError::DegenerateFrequency));
    }

    fn sech_params(f0: f64, eps: f64, c1: Complex64, c2: Complex64) -> SechSolutionParams {
        SechSolutionParams { f0, t_scale: 1.0, epsilon: eps, c1, c2 }
    }

    #[test]
    fn sech_basis_matches_frozen_values() {
        let p = sech_params(0.8, 1.0, c64(1.0, 0.0), c64(0.0, 0.0));
        let cases = [
            (
                -3.0,
                c64(-0.26994130215203904, -4.6471460951101091),
                c64(-0.0056319518521715944, 0.21431474276576366),
            ),
            (
                0.0,
                c64(-0.16412585829082401, 2.5099580876091664),
                c64(-0.037890851552768400, -0.27051272241615245),
            ),
            (
                2.0,
                c64(-2.8320072521083696, -3.6724615169160433),
                c64(-0.14677487222567541, 0.15723052146046705),
            ),
            (
                15.0,
                c64(-1.4708495710853760, -4.7581606168834560),
                c64(-0.045302570449941509, 0.19508053415081361),
            ),
        ];
        for (t, want_p, want_m) in cases {
            let (up, um) = sech_basis(&p, t).unwrap();
            assert_close(up, want_p, 1e-7, &format!("u+ at {t}"));
            assert_close(um, want_m, 1e-7, &format!("u- at {t}"));
        }
        let q = sech_params(0.5, 0.5, c64(1.0, 0.0), c64(0.0, 0.0));
        let cases2 = [
            (
                -3.0,
                c64(1.4402061815890074, -1.5801965330204187),
                c64(0.33144052813933900, 0.32919025004359733),
            ),
            (
                0.0,
                c64(1.0249391544715473, 0.43661372969231474),
                c64(0.30498231709652715, -0.51875887458923856),
            ),
            (
                2.0,
                c64(-1.4924913545438549, 0.46914573229871320),
                c64(-0.19441005775470937, -0.52172049876653771),
            ),
            (
                15.0,
                c64(-2.0085864698018212, 0.49876598601299763),
                c64(-0.23581436215081141, -0.41839866322488894),
            ),
        ];
        for (t, want_p, want_m) in cases2 {
            let (up, um) = sech_basis(&q, t).unwrap();
            assert_close(up, want_p, 1e-7, &format!("set2 u+ at {t}"));
            assert_close(um, want_m, 1e-7, &format!("set2 u- at {t}"));
        }
    }

    #[test]
    fn sech_connection_matrix_matches_frozen_values() {
        let out = sech_out_asymptotics(0.8, 1.0, 1.0).unwrap();
        let want = [
            [c64(0.0, -1.1733792859658327), c64(-0.96561245655879479, 0.25499304539496579)],
            [c64(-0.96561245655879479, -0.25499304539496579), c64(0.0, -0.0021912186191136039)],
        ];
        for r in 0..2 {
            for cidx in 0..2 {
                assert_close(
                    out.sigma[r][cidx],
                    want[r][cidx],
                    1e-10,
                    &format!("sigma[{r}][{cidx}]"),
                );
            }
        }
        let det = out.sigma[0][0] * out.sigma[1][1] - out.sigma[0][1] * out.sigma[1][0];
        assert_close(det, c64(-1.0, 0.0), 1e-12, "det sigma");

        let out2 = sech_out_asymptotics(0.5, 1.0, 0.5).unwrap();
        assert_close(out2.sigma[0][0], c64(0.0, -1.9171523356672743), 1e-10, "set2 s11");
        assert_close(
            out2.sigma[1][0],
            c64(-0.33417967752727967, 0.85410324314318117),
            1e-10,
            "set2 s21",
        );
        let det2 = out2.sigma[0][0] * out2.sigma[1][1] - out2.sigma[0][1] * out2.sigma[1][0];
        assert_close(det2, c64(-1.0, 0.0), 1e-12, "set2 det");
    }

    #[test]
    fn sech_exchange_map_at_zero_coupling() {
        let theta = std::f64::consts::PI * 0.8;
        let out = sech_out_asymptotics(0.8, 1.0, 0.0).unwrap();
        assert_close(out.sigma[0][0], c64(0.0, -theta.sin()), 1e-12, "s11");
        assert_close(out.sigma[1][1], c64(0.0, -theta.sin()), 1e-12, "s22");
        assert_close(out.sigma[0][1], c64(theta.cos(), 0.0), 1e-12, "s12");
        assert_close(out.sigma[1][0], c64(theta.cos(), 0.0), 1e-12, "s21");
        assert_close(out.exchange_phase, c64(theta.cos(), -theta.sin()), 1e-15, "phase");
    }

    #[test]
    fn sech_solution_satisfies_second_order_equation() {
        let p = sech_params(0.8, 1.0, c64(0.4, -0.3), c64(0.2, 0.6));
        let cfg = FieldConfiguration {
            epsilon: 1.0,
            layout: Layout::ZDrive,
            profile: DriveProfile::Sech { f0: 0.8, t_scale: 1.0 },
        };
        let probe = |t: f64| sech_solution_with_derivatives(&p, t).unwrap();
        for &t in &[-35.0, -10.0, -3.0, -1.0, 0.0, 0.5, 2.0, 8.0, 29.0, 31.0] {
            let r = second_order_residual(
                &ResidualProbe::Analytic(&probe),
                &cfg,
                t,
                ComponentEq::First,
            );
            assert!(r.norm() < 1e-8, "residual {:.3e} at t={t}", r.norm());
        }
    }

    #[test]
    fn sech_spinor_matches_numerical_evolution() {
        let p = sech_params(0.8, 1.0, c64(0.5, 0.2), c64(-0.1, 0.4));
        let cfg = FieldConfiguration {
            epsilon: 1.0,
            layout: Layout::ZDrive,
            profile: DriveProfile::Sech { f0: 0.8, t_scale: 1.0 },
        };
        let start = sech_spinor(&p, -12.0).unwrap();
        let traj = evolve_schrodinger(&cfg, start, -12.0, 12.0, 1e-12).unwrap();
        for &t in &[-5.0, -1.0, 0.0, 1.0, 4.0, 12.0] {
            let exact = sech_spinor(&p, t).unwrap();
            let num = traj.eval(t);
            assert!(
                (exact.psi1 - num.psi1).norm() < 1e-8,
                "psi1 at t={t}: diff {:.3e}",
                (exact.psi1 - num.psi1).norm()
            );
            assert!((exact.psi2 - num.psi2).norm() < 1e-8, "psi2 at t={t}");
        }
    }

    #[test]
    fn sech_time_reflection_pairs_the_basis() {
        for (f0, eps) in [(0.8, 1.0), (0.5, 0.5)] {
            let p = sech_params(f0, eps, c64(1.0, 0.0), c64(0.0, 0.0));
            let out = sech_out_asymptotics(f0, 1.0, eps).unwrap();
            for &t in &[0.7, 2.0, 15.0] {
                let (up_pos, um_pos) = sech_basis(&p, t).unwrap();
                let (up_neg, _) = sech_basis(&p, -t).unwrap();
                let lhs = up_neg.conj();
                let rhs = out.sigma[1][0].conj() * up_pos + out.sigma[0][0].conj() * um_pos;
                assert!(
                    (lhs - rhs).norm() < 1e-5,
                    "reflection pairing off at t={t}: {:.3e}",
                    (lhs - rhs).norm()
                );
            }
        }
    }

    #[test]
    fn sech_matching_reproduces_incoming_wave() {
        let eps = 1.0;
        let p = sech_match_initial(0.8, 1.0, eps, c64(0.6, 0.2), c64(-0.4, 0.3));
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for &t in &[-22.0, -25.0] {
            let asym = c64(0.6, 0.2) * s * (I * eps * t).exp()
                + c64(-0.4, 0.3) * s * (-I * eps * t).exp();
            assert_close(sech_solution(&p, t).unwrap(), asym, 1e-8, &format!("t={t}"));
        }
    }

    #[test]
    fn sech_zero_coupling_solution_is_rejected() {
        let p = sech_params(0.8, 0.0, c64(1.0, 0.0), c64(0.0, 0.0));
        assert!(matches!(
            sech_solution(&p, 0.0),
            Err(ExactError::Special(SpecialError::GammaDegenerate))
        ));
    }

    #[test]
    fn sech_transition_probability_is_the_pulse_area_formula() {
        let pi = std::f64::consts::PI;
        for (f0, eps, t_scale) in [(0.8, 1.0, 1.0), (0.5, 0.5, 1.0), (0.3, 0.7, 1.4)] {
            let sc = TransitionScenario::Sech { f0, t_scale, epsilon: eps };
            let p = transition_probability(&sc, InState::Lower).unwrap();
            let want = (pi * f0 * t_scale).sin().powi(2) / (pi * eps * t_scale).cosh().powi(2);
            assert!(
                (p - want).abs() < 1e-10,
                "sech transition {p} vs {want} at f0={f0}, eps={eps}"
            );
            let (tr, sv) = scattering_outcome(&sc, InState::Upper).unwrap();
            assert!((tr + sv - 1.0).abs() < 1e-9, "conservation");
            assert!((tr - p).abs() < 1e-10, "up/down symmetry");
        }
    }

    #[test]
    fn tanh_probabilities_conserve_and_degenerate_cases_vanish() {
        for (f0, f1, eps) in [(1.0, 0.5, 1.0), (0.5, 2.0, 2.0), (2.0, 0.1, 0.4)] {
            let sc = TransitionScenario::Tanh { f0, f1, t_scale: 1.0, epsilon: eps };
            for st in [InState::Lower, InState::Upper] {
                let (tr, sv) = scattering_outcome(&sc, st).unwrap();
                assert!((tr + sv - 1.0).abs() < 1e-9, "conservation at {f0},{f1},{eps}");
                assert!((0.0..=1.0 + 1e-12).contains(&tr));
            }
        }
        let frozen = TransitionScenario::Tanh { f0: 1.0, f1: 0.5, t_scale: 1.0, epsilon: 0.0 };
        assert_eq!(transition_probability(&frozen, InState::Lower).unwrap(), 0.0);
        let flat = TransitionScenario::Sech { f0: 0.0, t_scale: 1.0, epsilon: 1.0 };
        assert_eq!(transition_probability(&flat, InState::Upper).unwrap(), 0.0);
    }
}
