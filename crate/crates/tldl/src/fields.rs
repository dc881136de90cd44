//! Time-dependent drive profiles and the two field layouts they feed.
//!
//! A drive profile is a scalar function of time: constant, tanh step, sech
//! pulse, or a real trigonometric sum with one or two base frequencies. A
//! field configuration pairs a profile with a coupling strength and a layout
//! that places the drive and the coupling on fixed axes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("parameter {name} must be positive, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },
    #[error("harmonic ({n}, {m}) lies outside the stored half-space")]
    HalfSpaceViolation { n: i32, m: i32 },
    #[error("zero-frequency coefficient must be real, got imaginary part {im}")]
    NonRealCoefficient { im: f64 },
    #[error("harmonic ({n}, {m}) appears more than once")]
    DuplicateHarmonic { n: i32, m: i32 },
}

/// Scalar drive profile f(t).
///
/// Trigonometric profiles store one coefficient `[n, re, im]` per positive
/// harmonic (plus an optional real `n = 0` entry); the negative harmonics are
/// implied by conjugation so the sum is real.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DriveProfile {
    Constant {
        f0: f64,
    },
    Tanh {
        f0: f64,
        f1: f64,
        #[serde(rename = "T")]
        t_scale: f64,
    },
    Sech {
        f0: f64,
        #[serde(rename = "T")]
        t_scale: f64,
    },
    Periodic {
        omega: f64,
        coefficients: Vec<(u32, f64, f64)>,
    },
    QuasiPeriodic {
        omega1: f64,
        omega2: f64,
        coefficients: Vec<(i32, i32, f64, f64)>,
    },
}

impl DriveProfile {
    pub fn validate(&self) -> Result<(), FieldError> {
        match self {
            DriveProfile::Constant { .. } => Ok(()),
            DriveProfile::Tanh { t_scale, .. } | DriveProfile::Sech { t_scale, .. } => {
                if *t_scale > 0.0 && t_scale.is_finite() {
                    Ok(())
                } else {
                    Err(FieldError::NonPositiveParameter { name: "T", value: *t_scale })
                }
            }
            DriveProfile::Periodic { omega, coefficients } => {
                if !(*omega > 0.0 && omega.is_finite()) {
                    return Err(FieldError::NonPositiveParameter { name: "omega", value: *omega });
                }
                let mut seen = Vec::new();
                for &(n, _re, im) in coefficients {
                    if n == 0 && im != 0.0 {
                        return Err(FieldError::NonRealCoefficient { im });
                    }
                    if seen.contains(&n) {
                        return Err(FieldError::DuplicateHarmonic { n: n as i32, m: 0 });
                    }
                    seen.push(n);
                }
                Ok(())
            }
            DriveProfile::QuasiPeriodic { omega1, omega2, coefficients } => {
                for (name, w) in [("omega1", *omega1), ("omega2", *omega2)] {
                    if !(w > 0.0 && w.is_finite()) {
                        return Err(FieldError::NonPositiveParameter { name, value: w });
                    }
                }
                let mut seen = Vec::new();
                for &(n, m, _re, im) in coefficients {
                    let in_half_space = n > 0 || (n == 0 && m >= 0);
                    if !in_half_space {
                        return Err(FieldError::HalfSpaceViolation { n, m });
                    }
                    if n == 0 && m == 0 && im != 0.0 {
                        return Err(FieldError::NonRealCoefficient { im });
                    }
                    if seen.contains(&(n, m)) {
                        return Err(FieldError::DuplicateHarmonic { n, m });
                    }
                    seen.push((n, m));
                }
                Ok(())
            }
        }
    }

    /// f(t).
    pub fn value(&self, t: f64) -> f64 {
        match self {
            DriveProfile::Constant { f0 } => *f0,
            DriveProfile::Tanh { f0, f1, t_scale } => f0 * (t / t_scale).tanh() + f1,
            DriveProfile::Sech { f0, t_scale } => f0 / (t / t_scale).cosh(),
            DriveProfile::Periodic { omega, .. } => {
                self.angular_value([*omega * t, 0.0]).expect("periodic is angular")
            }
            DriveProfile::QuasiPeriodic { omega1, omega2, .. } => self
                .angular_value([*omega1 * t, *omega2 * t])
                .expect("quasi-periodic is angular"),
        }
    }

    /// df/dt.
    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            DriveProfile::Constant { .. } => 0.0,
            DriveProfile::Tanh { f0, t_scale, .. } => {
                let sech = 1.0 / (t / t_scale).cosh();
                f0 / t_scale * sech * sech
            }
            DriveProfile::Sech { f0, t_scale } => {
                let tau = t / t_scale;
                -f0 / t_scale * tau.sinh() / (tau.cosh() * tau.cosh())
            }
            DriveProfile::Periodic { omega, .. } => {
                let g = self.angular_gradient([*omega * t, 0.0]).expect("periodic is angular");
                omega * g[0]
            }
            DriveProfile::QuasiPeriodic { omega1, omega2, .. } => {
                let g = self
                    .angular_gradient([*omega1 * t, *omega2 * t])
                    .expect("quasi-periodic is angular");
                omega1 * g[0] + omega2 * g[1]
            }
        }
    }

    /// Number of independent drive angles: 1 for periodic, 2 for
    /// quasi-periodic, `None` for profiles with no angular structure.
    pub fn angular_arity(&self) -> Option<usize> {
        match self {
            DriveProfile::Periodic { .. } => Some(1),
            DriveProfile::QuasiPeriodic { .. } => Some(2),
            _ => None,
        }
    }

    /// Base frequencies paired with the angles; zero-padded to length 2.
    pub fn frequencies(&self) -> Option<[f64; 2]> {
        match self {
            DriveProfile::Periodic { omega, .. } => Some([*omega, 0.0]),
            DriveProfile::QuasiPeriodic { omega1, omega2, .. } => Some([*omega1, *omega2]),
            _ => None,
        }
    }

    /// The trigonometric sum as a function of the angles themselves.
    pub fn angular_value(&self, theta: [f64; 2]) -> Option<f64> {
        match self {
            DriveProfile::Periodic { coefficients, .. } => {
                let mut f = 0.0;
                for &(n, re, im) in coefficients {
                    if n == 0 {
                        f += re;
                    } else {
                        let a = n as f64 * theta[0];
                        f += 2.0 * (re * a.cos() - im * a.sin());
                    }
                }
                Some(f)
            }
            DriveProfile::QuasiPeriodic { coefficients, .. } => {
                let mut f = 0.0;
                for &(n, m, re, im) in coefficients {
                    if n == 0 && m == 0 {
                        f += re;
                    } else {
                        let a = n as f64 * theta[0] + m as f64 * theta[1];
                        f += 2.0 * (re * a.cos() - im * a.sin());
                    }
                }
                Some(f)
            }
            _ => None,
        }
    }

    /// Partial derivatives of [`Self::angular_value`] with respect to each angle.
    pub fn angular_gradient(&self, theta: [f64; 2]) -> Option<[f64; 2]> {
        match self {
            DriveProfile::Periodic { coefficients, .. } => {
                let mut g = 0.0;
                for &(n, re, im) in coefficients {
                    if n > 0 {
                        let nf = n as f64;
                        let a = nf * theta[0];
                        g += 2.0 * nf * (-re * a.sin() - im * a.cos());
                    }
                }
                Some([g, 0.0])
            }
            DriveProfile::QuasiPeriodic { coefficients, .. } => {
                let mut g = [0.0, 0.0];
                for &(n, m, re, im) in coefficients {
                    if n == 0 && m == 0 {
                        continue;
                    }
                    let a = n as f64 * theta[0] + m as f64 * theta[1];
                    let d = 2.0 * (-re * a.sin() - im * a.cos());
                    g[0] += n as f64 * d;
                    g[1] += m as f64 * d;
                }
                Some(g)
            }
            _ => None,
        }
    }
}

/// Which axes carry the drive f(t) and the coupling epsilon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layout {
    /// B = (-2 epsilon, 0, -2 f(t)): drive on the third axis.
    ZDrive,
    /// B = (2 f(t), 0, -2 epsilon): drive on the first axis.
    XDrive,
}

/// A drive profile, coupling strength, and layout together fix the field
/// B(t) that all three dynamical representations share.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfiguration {
    pub epsilon: f64,
    pub layout: Layout,
    pub profile: DriveProfile,
}

impl FieldConfiguration {
    pub fn validate(&self) -> Result<(), FieldError> {
        self.profile.validate()
    }

    pub fn drive(&self, t: f64) -> f64 {
        self.profile.value(t)
    }

    pub fn drive_derivative(&self, t: f64) -> f64 {
        self.profile.derivative(t)
    }

    /// B(t) on the three spin axes.
    pub fn field_at(&self, t: f64) -> [f64; 3] {
        self.field_for_drive(self.profile.value(t))
    }

    /// dB/dt.
    pub fn field_derivative_at(&self, t: f64) -> [f64; 3] {
        let df = self.profile.derivative(t);
        match self.layout {
            Layout::ZDrive => [0.0, 0.0, -2.0 * df],
            Layout::XDrive => [2.0 * df, 0.0, 0.0],
        }
    }

    /// The field for a given drive value, independent of time.
    pub fn field_for_drive(&self, f: f64) -> [f64; 3] {
        match self.layout {
            Layout::ZDrive => [-2.0 * self.epsilon, 0.0, -2.0 * f],
            Layout::XDrive => [2.0 * f, 0.0, -2.0 * self.epsilon],
        }
    }

    /// Precession vector of the Bloch flow; coincides with the field.
    pub fn omega_vector(&self, t: f64) -> [f64; 3] {
        self.field_at(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tanh_profile_values() {
        let p = DriveProfile::Tanh { f0: 1.0, f1: 0.5, t_scale: 1.0 };
        assert_eq!(p.value(0.0), 0.5);
        assert!((p.value(50.0) - 1.5).abs() < 1e-12);
        assert!((p.value(-50.0) + 0.5).abs() < 1e-12);
        assert!((p.derivative(0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sech_profile_values() {
        let p = DriveProfile::Sech { f0: 2.0, t_scale: 0.5 };
        assert_eq!(p.value(0.0), 2.0);
        assert_eq!(p.derivative(0.0), 0.0);
        assert!(p.value(5.0) < 1e-3);
    }

    #[test]
    fn profile_derivatives_match_finite_differences() {
        let profiles = [
            DriveProfile::Tanh { f0: 0.7, f1: -0.2, t_scale: 1.3 },
            DriveProfile::Sech { f0: 1.1, t_scale: 0.8 },
            DriveProfile::Periodic {
                omega: 1.7,
                coefficients: vec![(0, 0.3, 0.0), (1, 0.5, -0.2), (3, -0.1, 0.4)],
            },
            DriveProfile::QuasiPeriodic {
                omega1: 1.0,
                omega2: std::f64::consts::SQRT_2,
                coefficients: vec![(0, 0, 0.1, 0.0), (1, 0, 0.4, 0.1), (1, -2, 0.2, -0.3)],
            },
        ];
        let h = 1e-5;
        for p in &profiles {
            for k in -5..=5 {
                let t = 0.37 * k as f64;
                let fd = (p.value(t + h) - p.value(t - h)) / (2.0 * h);
                assert!(
                    (p.derivative(t) - fd).abs() < 1e-8,
                    "derivative mismatch for {p:?} at t={t}"
                );
            }
        }
    }

    #[test]
    fn trigonometric_sum_is_real_sum_over_conjugate_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let coeffs: Vec<(u32, f64, f64)> = (0..4)
                .map(|n| (n, rng.gen_range(-1.0..1.0), if n == 0 { 0.0 } else { rng.gen_range(-1.0..1.0) }))
                .collect();
            let omega = rng.gen_range(0.5..3.0);
            let p = DriveProfile::Periodic { omega, coefficients: coeffs.clone() };
            let t = rng.gen_range(-5.0..5.0);
            let mut two_sided = num_complex::Complex64::new(0.0, 0.0);
            for &(n, re, im) in &coeffs {
                let c = num_complex::Complex64::new(re, im);
                let e = num_complex::Complex64::new(0.0, n as f64 * omega * t).exp();
                if n == 0 {
                    two_sided += c;
                } else {
                    two_sided += c * e + c.conj() * e.conj();
                }
            }
            assert!(two_sided.im.abs() < 1e-13);
            assert!((p.value(t) - two_sided.re).abs() < 1e-13);
        }
    }

    #[test]
    fn layouts_place_drive_and_coupling() {
        let z = FieldConfiguration {
            epsilon: 1.0,
            layout: Layout::ZDrive,
            profile: DriveProfile::Constant { f0: 0.5 },
        };
        assert_eq!(z.field_at(3.0), [-2.0, 0.0, -1.0]);
        let x = FieldConfiguration {
            epsilon: 1.0,
            layout: Layout::XDrive,
            profile: DriveProfile::Constant { f0: 0.5 },
        };
        assert_eq!(x.field_at(3.0), [1.0, 0.0, -2.0]);
        assert_eq!(x.omega_vector(3.0), x.field_at(3.0));
    }

    #[test]
    fn validation_rejects_bad_profiles() {
        assert!(DriveProfile::Tanh { f0: 1.0, f1: 0.0, t_scale: 0.0 }.validate().is_err());
        assert!(DriveProfile::Periodic {
            omega: 1.0,
            coefficients: vec![(0, 0.1, 0.5)],
        }
        .validate()
        .is_err());
        assert!(DriveProfile::Periodic {
            omega: 1.0,
            coefficients: vec![(1, 0.1, 0.5), (1, 0.2, 0.0)],
        }
        .validate()
        .is_err());
        assert!(DriveProfile::QuasiPeriodic {
            omega1: 1.0,
            omega2: 2.0,
            coefficients: vec![(-1, 2, 0.1, 0.0)],
        }
        .validate()
        .is_err());
        assert!(DriveProfile::QuasiPeriodic {
            omega1: 1.0,
            omega2: 2.0,
            coefficients: vec![(0, 1, 0.1, 0.2), (1, -3, 0.0, 0.4)],
        }
        .validate()
        .is_ok());
    }

    #[test]
    fn profiles_round_trip_through_json() {
        let p = DriveProfile::Tanh { f0: 1.0, f1: 0.5, t_scale: 2.0 };
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"kind\":\"tanh\"") && s.contains("\"T\":2.0"), "{s}");
        let back: DriveProfile = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        let q: DriveProfile = serde_json::from_str(
            r#"{"kind":"periodic","omega":1.5,"coefficients":[[0,0.2,0.0],[1,0.5,-0.1]]}"#,
        )
        .unwrap();
        assert!((q.value(0.0) - (0.2 + 1.0)).abs() < 1e-15);
    }
}
