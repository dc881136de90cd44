//! Complex log-gamma and the Gauss hypergeometric function 2F1 with complex
//! parameters, including the z -> 1-z connection formula and analytic
//! continuation of 2F1 along a path in the complex plane.
//!
//! The continuation routine is what lets the closed-form pulse solutions cross
//! the branch cut of 2F1 on a prescribed sheet instead of the principal one.

use num_complex::Complex64;
use thiserror::Error;

const POLE_TOL: f64 = 1e-12;
const LOG_CASE_TOL: f64 = 1e-10;
const SERIES_CAP: usize = 100_000;
const SERIES_EPS: f64 = 1e-17;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecialError {
    #[error("log-gamma pole at nonpositive integer z = {re}{im:+}i")]
    PoleAtNonpositiveInteger { re: f64, im: f64 },
    #[error("gamma function pole in a connection coefficient")]
    GammaDegenerate,
    #[error("logarithmic connection case: gamma - alpha - beta is an integer")]
    LogarithmicCase,
    #[error("series did not converge within {0} terms")]
    NoConvergence(usize),
    #[error("continuation path passes too close to a singular point near z = {re}{im:+}i")]
    BranchTracking { re: f64, im: f64 },
}

/// The three parameters of 2F1(alpha, beta; gamma; z).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypParams {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub gamma: Complex64,
}

impl HypParams {
    /// Rejects gamma at zero or a negative integer, where 2F1 is undefined.
    pub fn new(alpha: Complex64, beta: Complex64, gamma: Complex64) -> Result<Self, SpecialError> {
        if near_nonpositive_integer(gamma, POLE_TOL) {
            return Err(SpecialError::GammaDegenerate);
        }
        Ok(Self { alpha, beta, gamma })
    }
}

fn near_nonpositive_integer(z: Complex64, tol: f64) -> bool {
    if z.im.abs() > tol {
        return false;
    }
    let r = z.re.round();
    r <= 0.5 && (z.re - r).abs() <= tol
}

fn near_integer(z: Complex64, tol: f64) -> bool {
    z.im.abs() <= tol && (z.re - z.re.round()).abs() <= tol
}

/// 1 - z with the sign of the imaginary zero preserved, so that real z > 1
/// keeps its branch-cut side through the subtraction.
fn one_minus(z: Complex64) -> Complex64 {
    Complex64::new(1.0 - z.re, -z.im)
}

const LANCZOS_G: f64 = 4.7421875;
const LANCZOS_C: [f64; 15] = [
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    0.33994649984811888699e-4,
    0.46523628927048575665e-4,
    -0.98374475304879564677e-4,
    0.15808870322491248884e-3,
    -0.21026444172410488319e-3,
    0.21743961811521264320e-3,
    -0.16431810653676389022e-3,
    0.84418223983852743293e-4,
    -0.26190838401581408670e-4,
    0.36899182659531622704e-5,
];

/// Principal-branch log-gamma for complex arguments.
///
/// Lanczos approximation for Re z > 0.5, reflection formula otherwise.
pub fn lngamma(z: Complex64) -> Result<Complex64, SpecialError> {
    if near_nonpositive_integer(z, POLE_TOL) {
        return Err(SpecialError::PoleAtNonpositiveInteger { re: z.re, im: z.im });
    }
    if z.re < 0.5 {
        let pi = std::f64::consts::PI;
        return Ok(Complex64::new(pi.ln(), 0.0) - ln_sin_pi(z) - lngamma(one_minus(z))?);
    }
    let x = z - 1.0;
    let mut ag = Complex64::new(LANCZOS_C[0], 0.0);
    for (k, &c) in LANCZOS_C.iter().enumerate().skip(1) {
        ag += c / (x + k as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    let half_ln_2pi = 0.5 * (2.0 * std::f64::consts::PI).ln();
    Ok(half_ln_2pi + (x + 0.5) * t.ln() - t + ag.ln())
}

fn ln_sin_pi(z: Complex64) -> Complex64 {
    let pi = std::f64::consts::PI;
    if z.im.abs() < 15.0 {
        return (z * pi).sin().ln();
    }
    if z.im > 0.0 {
        let w = z * pi;
        let corr = (Complex64::new(1.0, 0.0) - (Complex64::i() * w * 2.0).exp()).ln();
        Complex64::new(-std::f64::consts::LN_2, pi / 2.0) - Complex64::i() * w + corr
    } else {
        ln_sin_pi(z.conj()).conj()
    }
}

/// Gamma(z) through the log form.
pub fn gamma(z: Complex64) -> Result<Complex64, SpecialError> {
    Ok(lngamma(z)?.exp())
}

/// 1/Gamma(z); zero at the poles of Gamma.
pub fn recip_gamma(z: Complex64) -> Complex64 {
    if near_nonpositive_integer(z, POLE_TOL) {
        Complex64::new(0.0, 0.0)
    } else {
        (-lngamma(z).expect("pole excluded")).exp()
    }
}

/// Product of Gamma(numerators) / product of Gamma(denominators), evaluated in
/// log space and exponentiated once. A pole in a denominator collapses the
/// ratio to zero; a pole in a numerator is an error.
pub fn gamma_ratio(num: &[Complex64], den: &[Complex64]) -> Result<Complex64, SpecialError> {
    let num_pole = num.iter().any(|&z| near_nonpositive_integer(z, POLE_TOL));
    let den_pole = den.iter().any(|&z| near_nonpositive_integer(z, POLE_TOL));
    if num_pole {
        return Err(SpecialError::GammaDegenerate);
    }
    if den_pole {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for &z in num {
        acc += lngamma(z)?;
    }
    for &z in den {
        acc -= lngamma(z)?;
    }
    Ok(acc.exp())
}

fn terminating_index(x: Complex64) -> Option<usize> {
    if near_nonpositive_integer(x, POLE_TOL) {
        Some((-x.re.round()) as usize)
    } else {
        None
    }
}

fn finite_sum(p: &HypParams, z: Complex64, n_terms: usize) -> Complex64 {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for n in 0..n_terms {
        let nf = n as f64;
        term *= (p.alpha + nf) * (p.beta + nf) / ((p.gamma + nf) * (nf + 1.0)) * z;
        sum += term;
    }
    sum
}

fn gauss_series(p: &HypParams, z: Complex64) -> Result<Complex64, SpecialError> {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut small_streak = 0usize;
    let mut growth_streak = 0usize;
    let mut prev_mag = 1.0f64;
    for n in 0..SERIES_CAP {
        let nf = n as f64;
        term *= (p.alpha + nf) * (p.beta + nf) / ((p.gamma + nf) * (nf + 1.0)) * z;
        sum += term;
        let mag = term.norm();
        if mag <= SERIES_EPS * sum.norm().max(1e-300) {
            small_streak += 1;
            if small_streak >= 3 {
                return Ok(sum);
            }
        } else {
            small_streak = 0;
        }
        if n > 50 {
            if mag >= prev_mag {
                growth_streak += 1;
                if growth_streak > 200 && mag > 1e-9 * sum.norm().max(1e-300) {
                    return Err(SpecialError::NoConvergence(n));
                }
            } else {
                growth_streak = 0;
            }
        }
        prev_mag = mag;
    }
    Err(SpecialError::NoConvergence(SERIES_CAP))
}

fn pfaff(p: &HypParams, z: Complex64) -> Result<Complex64, SpecialError> {
    let omz = one_minus(z);
    let w = z / (z - 1.0);
    let q = HypParams {
        alpha: p.alpha,
        beta: p.gamma - p.beta,
        gamma: p.gamma,
    };
    Ok(omz.powc(-p.alpha) * gauss_series(&q, w)?)
}

fn series_or_pfaff(p: &HypParams, w: Complex64) -> Result<Complex64, SpecialError> {
    if w.norm() <= 0.6 {
        gauss_series(p, w)
    } else if (w / (w - 1.0)).norm() <= 0.8 {
        pfaff(p, w)
    } else if w.norm() < 1.0 {
        gauss_series(p, w)
    } else {
        Err(SpecialError::NoConvergence(0))
    }
}

struct ConnectionPieces {
    coeff1: Complex64,
    params1: HypParams,
    coeff2: Complex64,
    power2: Complex64,
    params2: HypParams,
}

fn connection_pieces(p: &HypParams) -> Result<ConnectionPieces, SpecialError> {
    let s = p.gamma - p.alpha - p.beta;
    if near_integer(s, LOG_CASE_TOL) {
        return Err(SpecialError::LogarithmicCase);
    }
    let coeff1 = gamma_ratio(&[p.gamma, s], &[p.gamma - p.alpha, p.gamma - p.beta])?;
    let coeff2 = gamma_ratio(&[p.gamma, -s], &[p.alpha, p.beta])?;
    Ok(ConnectionPieces {
        coeff1,
        params1: HypParams {
            alpha: p.alpha,
            beta: p.beta,
            gamma: p.alpha + p.beta - p.gamma + 1.0,
        },
        coeff2,
        power2: s,
        params2: HypParams {
            alpha: p.gamma - p.alpha,
            beta: p.gamma - p.beta,
            gamma: s + 1.0,
        },
    })
}

/// Decomposes 2F1(z) into the two terms of the z -> 1-z connection formula.
/// Returns the pair of term values; their sum equals `hyp2f1(params, z)`.
pub fn connect_z_to_1mz(p: &HypParams, z: Complex64) -> Result<[Complex64; 2], SpecialError> {
    if near_nonpositive_integer(p.gamma, POLE_TOL) {
        return Err(SpecialError::GammaDegenerate);
    }
    let pieces = connection_pieces(p)?;
    let w = one_minus(z);
    let t1 = pieces.coeff1 * series_or_pfaff(&pieces.params1, w)?;
    let t2 = if pieces.coeff2.norm() == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        pieces.coeff2 * w.powc(pieces.power2) * series_or_pfaff(&pieces.params2, w)?
    };
    Ok([t1, t2])
}

/// Gauss hypergeometric function 2F1(alpha, beta; gamma; z), principal branch.
///
/// Region dispatch: defining series for small |z|, Pfaff transformation for
/// arguments far left, z -> 1-z connection near z = 1, then capped series
/// fallbacks. Real z > 1 sits on the branch cut; the side is taken from the
/// sign of the imaginary part (+0.0 means the upper side).
pub fn hyp2f1(p: &HypParams, z: Complex64) -> Result<Complex64, SpecialError> {
    if near_nonpositive_integer(p.gamma, POLE_TOL) {
        return Err(SpecialError::GammaDegenerate);
    }
    if z.re == 0.0 && z.im == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let term_a = terminating_index(p.alpha);
    let term_b = terminating_index(p.beta);
    if term_a.is_some() || term_b.is_some() {
        let n = term_a.unwrap_or(usize::MAX).min(term_b.unwrap_or(usize::MAX));
        return Ok(finite_sum(p, z, n));
    }
    if z.norm() <= 0.5 {
        return gauss_series(p, z);
    }
    if (z / (z - 1.0)).norm() <= 0.75 {
        return pfaff(p, z);
    }
    let omz = one_minus(z);
    if omz.norm() <= 0.85 || ((z - 1.0) / z).norm() <= 0.85 {
        match connect_z_to_1mz(p, z) {
            Ok([t1, t2]) => return Ok(t1 + t2),
            Err(SpecialError::LogarithmicCase) => {}
            Err(e) => return Err(e),
        }
    }
    if z.norm() < 1.0 {
        return gauss_series(p, z);
    }
    if (z / (z - 1.0)).norm() < 1.0 {
        return pfaff(p, z);
    }
    Err(SpecialError::NoConvergence(0))
}

/// d/dz 2F1(alpha, beta; gamma; z) via the contiguous-parameter identity.
pub fn hyp2f1_derivative(p: &HypParams, z: Complex64) -> Result<Complex64, SpecialError> {
    let q = HypParams {
        alpha: p.alpha + 1.0,
        beta: p.beta + 1.0,
        gamma: p.gamma + 1.0,
    };
    Ok(p.alpha * p.beta / p.gamma * hyp2f1(&q, z)?)
}

const TAYLOR_STEP_RATIO: f64 = 0.35;
const TAYLOR_CAP: usize = 500;
const MIN_SINGULARITY_DISTANCE: f64 = 1e-8;

fn taylor_step(
    p: &HypParams,
    z0: Complex64,
    f: Complex64,
    fp: Complex64,
    d: Complex64,
) -> Result<(Complex64, Complex64), SpecialError> {
    let mut c_n = f;
    let mut c_n1 = fp;
    let mut val = c_n + c_n1 * d;
    let mut der = c_n1;
    let mut dpow = d;
    let q = z0 * (one_minus(z0));
    let mut small_streak = 0usize;
    for n in 0..TAYLOR_CAP {
        let nf = n as f64;
        let lin = nf * (Complex64::new(1.0, 0.0) - 2.0 * z0) + p.gamma
            - (p.alpha + p.beta + 1.0) * z0;
        let c_n2 = ((nf + p.alpha) * (nf + p.beta) * c_n - (nf + 1.0) * lin * c_n1)
            / (q * (nf + 2.0) * (nf + 1.0));
        der += (nf + 2.0) * c_n2 * dpow;
        dpow *= d;
        let term = c_n2 * dpow;
        val += term;
        if term.norm() <= 1e-18 * val.norm().max(1e-300) {
            small_streak += 1;
            if small_streak >= 3 {
                return Ok((val, der));
            }
        } else {
            small_streak = 0;
        }
        c_n = c_n1;
        c_n1 = c_n2;
    }
    Err(SpecialError::NoConvergence(TAYLOR_CAP))
}

/// Analytic continuation of 2F1 along the piecewise-linear path through
/// `path`, starting from the principal branch at `path[0]`.
///
/// Returns the continued value and its z-derivative at the final point. The
/// path must stay away from the singular points z = 0 and z = 1; the sheet
/// reached is determined by how the path winds around them.
pub fn hyp2f1_continued(
    p: &HypParams,
    path: &[Complex64],
) -> Result<(Complex64, Complex64), SpecialError> {
    let &start = path.first().ok_or(SpecialError::NoConvergence(0))?;
    let mut z0 = start;
    let mut f = hyp2f1(p, z0)?;
    let mut fp = hyp2f1_derivative(p, z0)?;
    for &target in &path[1..] {
        loop {
            let d = target - z0;
            if d.norm() == 0.0 {
                break;
            }
            let r = z0.norm().min((z0 - 1.0).norm());
            if r < MIN_SINGULARITY_DISTANCE {
                return Err(SpecialError::BranchTracking { re: z0.re, im: z0.im });
            }
            let max_step = TAYLOR_STEP_RATIO * r;
            let (step, arrived) = if d.norm() <= max_step {
                (d, true)
            } else {
                (d / d.norm() * max_step, false)
            };
            let (nf, nfp) = taylor_step(p, z0, f, fp, step)?;
            f = nf;
            fp = nfp;
            z0 = if arrived { target } else { z0 + step };
        }
    }
    Ok((f, fp))
}
