//! Adaptive Dormand-Prince 5(4) integration with a quartic dense-output
//! interpolant on every accepted step.
//!
//! The low-level [`Stepper`] advances one accepted step at a time so callers
//! can watch the state between steps (chart switching, section crossings).
//! [`integrate`] drives it over a full span; backward spans are integrated as
//! the time-reflected system.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at t = {t} (h = {h:.3e})")]
    StepFailure { t: f64, h: f64 },
    #[error("step budget of {0} accepted steps exhausted")]
    MaxStepsExceeded(usize),
    #[error("integration span is empty or not finite")]
    BadSpan,
}

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const MAX_STEPS: usize = 20_000_000;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// One accepted step with its dense-output polynomial.
#[derive(Debug, Clone)]
pub struct DenseSegment<const N: usize> {
    pub t0: f64,
    pub h: f64,
    rcont: [[f64; N]; 5],
}

impl<const N: usize> DenseSegment<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    /// Evaluates the interpolant; exact at both step endpoints.
    pub fn eval(&self, t: f64) -> [f64; N] {
        let theta = (t - self.t0) / self.h;
        let th1 = 1.0 - theta;
        let mut out = [0.0; N];
        for i in 0..N {
            let r = &self.rcont;
            out[i] = r[0][i]
                + theta
                    * (r[1][i] + th1 * (r[2][i] + theta * (r[3][i] + th1 * r[4][i])));
        }
        out
    }
}

/// Single-step driver holding the integrator state at time `t`.
pub struct Stepper<'a, const N: usize> {
    rhs: &'a dyn Fn(f64, &[f64; N]) -> [f64; N],
    pub t: f64,
    pub y: [f64; N],
    h: f64,
    tol: f64,
    k1: [f64; N],
    pub accepted: usize,
    pub rejected: usize,
    last_rejected: bool,
}

fn rms_scaled<const N: usize>(v: &[f64; N], sc: &[f64; N]) -> f64 {
    let mut s = 0.0;
    for i in 0..N {
        let r = v[i] / sc[i];
        s += r * r;
    }
    (s / N as f64).sqrt()
}

impl<'a, const N: usize> Stepper<'a, N> {
    pub fn new(rhs: &'a dyn Fn(f64, &[f64; N]) -> [f64; N], t0: f64, y0: [f64; N], tol: f64) -> Self {
        let k1 = rhs(t0, &y0);
        let h = initial_step(rhs, t0, &y0, &k1, tol);
        Stepper {
            rhs,
            t: t0,
            y: y0,
            h,
            tol,
            k1,
            accepted: 0,
            rejected: 0,
            last_rejected: false,
        }
    }

    /// Advances one accepted step, never past `t_limit`, and returns its
    /// dense segment. Requires `t_limit > self.t`.
    pub fn step(&mut self, t_limit: f64) -> Result<DenseSegment<N>, OdeError> {
        debug_assert!(t_limit > self.t);
        loop {
            let remaining = t_limit - self.t;
            let clipped = self.h >= remaining;
            let h = if clipped { remaining } else { self.h };
            let h_floor = 16.0 * f64::EPSILON * self.t.abs().max(1.0);
            if h < h_floor {
                return Err(OdeError::StepFailure { t: self.t, h });
            }

            let t = self.t;
            let y = &self.y;
            let k1 = self.k1;
            let mut ytmp = [0.0; N];

            for i in 0..N {
                ytmp[i] = y[i] + h * A21 * k1[i];
            }
            let k2 = (self.rhs)(t + C2 * h, &ytmp);
            for i in 0..N {
                ytmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
            }
            let k3 = (self.rhs)(t + C3 * h, &ytmp);
            for i in 0..N {
                ytmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            let k4 = (self.rhs)(t + C4 * h, &ytmp);
            for i in 0..N {
                ytmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            let k5 = (self.rhs)(t + C5 * h, &ytmp);
            for i in 0..N {
                ytmp[i] = y[i]
                    + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            let k6 = (self.rhs)(t + h, &ytmp);
            let mut ynew = [0.0; N];
            for i in 0..N {
                ynew[i] =
                    y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
            }
            let t_new = if clipped { t_limit } else { t + h };
            let k7 = (self.rhs)(t_new, &ynew);

            let mut errv = [0.0; N];
            let mut sc = [0.0; N];
            for i in 0..N {
                errv[i] = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                        + E7 * k7[i]);
                sc[i] = self.tol + self.tol * y[i].abs().max(ynew[i].abs());
            }
            let err = rms_scaled(&errv, &sc);

            if err <= 1.0 {
                let mut rcont = [[0.0; N]; 5];
                for i in 0..N {
                    let ydiff = ynew[i] - y[i];
                    let bspl = h * k1[i] - ydiff;
                    rcont[0][i] = y[i];
                    rcont[1][i] = ydiff;
                    rcont[2][i] = bspl;
                    rcont[3][i] = ydiff - h * k7[i] - bspl;
                    rcont[4][i] = h
                        * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i]
                            + D7 * k7[i]);
                }
                let seg = DenseSegment { t0: t, h: t_new - t, rcont };

                let fac_max = if self.last_rejected { 1.0 } else { FAC_MAX };
                let fac = (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, fac_max);
                self.h = (h * fac).max(h_floor);
                self.t = t_new;
                self.y = ynew;
                self.k1 = k7;
                self.accepted += 1;
                self.last_rejected = false;
                return Ok(seg);
            }

            self.rejected += 1;
            self.last_rejected = true;
            let fac = (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, 1.0);
            self.h = h * fac;
        }
    }
}

fn initial_step<const N: usize>(
    rhs: &dyn Fn(f64, &[f64; N]) -> [f64; N],
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    tol: f64,
) -> f64 {
    let mut sc = [0.0; N];
    for i in 0..N {
        sc[i] = tol + tol * y0[i].abs();
    }
    let d0 = rms_scaled(y0, &sc);
    let d1 = rms_scaled(f0, &sc);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let mut y1 = [0.0; N];
    for i in 0..N {
        y1[i] = y0[i] + h0 * f0[i];
    }
    let f1 = rhs(t0 + h0, &y1);
    let mut df = [0.0; N];
    for i in 0..N {
        df[i] = f1[i] - f0[i];
    }
    let d2 = rms_scaled(&df, &sc) / h0;
    let dm = d1.max(d2);
    let h1 = if dm <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / dm).powf(0.2)
    };
    (100.0 * h0).min(h1)
}

/// Dense solution over a requested span; `t1 < t0` is allowed and integrated
/// as the reflected system.
#[derive(Debug)]
pub struct OdeSolution<const N: usize> {
    segments: Vec<DenseSegment<N>>,
    pub t0: f64,
    pub t1: f64,
    reflected: bool,
    pub y_end: [f64; N],
    pub accepted: usize,
    pub rejected: usize,
}

impl<const N: usize> OdeSolution<N> {
    /// Evaluates the dense interpolant at `t`, clamped to the solved span.
    pub fn eval(&self, t: f64) -> [f64; N] {
        let s = if self.reflected { self.t0 - t } else { t - self.t0 };
        let s = s.clamp(0.0, (self.t1 - self.t0).abs());
        let idx = self
            .segments
            .partition_point(|seg| seg.t0 + seg.h < s)
            .min(self.segments.len() - 1);
        let seg = &self.segments[idx];
        seg.eval((seg.t0 + seg.h).min(s.max(seg.t0)))
    }

    pub fn sample(&self, ts: &[f64]) -> Vec<[f64; N]> {
        ts.iter().map(|&t| self.eval(t)).collect()
    }

    /// Accepted step boundary times, in the direction of integration,
    /// including both span endpoints.
    pub fn step_times(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.segments.len() + 1);
        let map = |s: f64| if self.reflected { self.t0 - s } else { self.t0 + s };
        out.push(map(0.0));
        for seg in &self.segments {
            out.push(map(seg.t0 + seg.h));
        }
        out
    }
}

/// Integrates dy/dt = rhs(t, y) from `t0` to `t1` at relative-plus-absolute
/// tolerance `tol`, returning the dense solution.
pub fn integrate<const N: usize>(
    rhs: &dyn Fn(f64, &[f64; N]) -> [f64; N],
    t0: f64,
    t1: f64,
    y0: [f64; N],
    tol: f64,
) -> Result<OdeSolution<N>, OdeError> {
    if !(t0.is_finite() && t1.is_finite()) || t0 == t1 {
        return Err(OdeError::BadSpan);
    }
    let span = (t1 - t0).abs();
    let reflected = t1 < t0;
    let forward: Box<dyn Fn(f64, &[f64; N]) -> [f64; N]> = if reflected {
        Box::new(move |s, y| {
            let mut v = rhs(t0 - s, y);
            for x in v.iter_mut() {
                *x = -*x;
            }
            v
        })
    } else {
        Box::new(move |s, y| rhs(t0 + s, y))
    };

    let mut stepper = Stepper::new(&forward, 0.0, y0, tol);
    let mut segments = Vec::new();
    while stepper.t < span {
        if stepper.accepted >= MAX_STEPS {
            return Err(OdeError::MaxStepsExceeded(MAX_STEPS));
        }
        segments.push(stepper.step(span)?);
    }
    Ok(OdeSolution {
        segments,
        t0,
        t1,
        reflected,
        y_end: stepper.y,
        accepted: stepper.accepted,
        rejected: stepper.rejected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_matches_closed_form() {
        let rhs = |_t: f64, y: &[f64; 1]| [-y[0]];
        let sol = integrate(&rhs, 0.0, 5.0, [1.0], 1e-12).unwrap();
        let want = (-5.0f64).exp();
        assert!((sol.y_end[0] - want).abs() < 1e-12, "got {}", sol.y_end[0]);
        assert!(sol.accepted > 10);
    }

    #[test]
    fn harmonic_oscillator_dense_output() {
        let rhs = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let sol = integrate(&rhs, 0.0, 20.0, [1.0, 0.0], 1e-10).unwrap();
        for k in 0..200 {
            let t = 0.1 * k as f64 + 0.0371;
            let y = sol.eval(t);
            assert!(
                (y[0] - t.cos()).abs() < 1e-8 && (y[1] + t.sin()).abs() < 1e-8,
                "dense output off at t={t}: {y:?}"
            );
        }
    }

    #[test]
    fn backward_integration_reflects_time() {
        let rhs = |_t: f64, y: &[f64; 1]| [-y[0]];
        let sol = integrate(&rhs, 0.0, -3.0, [1.0], 1e-12).unwrap();
        let want = 3.0f64.exp();
        assert!((sol.y_end[0] - want).abs() < 1e-10 * want, "got {}", sol.y_end[0]);
        let mid = sol.eval(-1.5);
        assert!((mid[0] - 1.5f64.exp()).abs() < 1e-10 * mid[0]);
        let times = sol.step_times();
        assert_eq!(times[0], 0.0);
        assert_eq!(*times.last().unwrap(), -3.0);
        assert!(times.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn nonautonomous_term_is_seen() {
        let rhs = |t: f64, y: &[f64; 1]| [y[0] * 0.0 + t.cos()];
        let sol = integrate(&rhs, 0.0, 7.0, [0.0], 1e-11).unwrap();
        assert!((sol.y_end[0] - 7.0f64.sin()).abs() < 1e-10);
    }

    #[test]
    fn blowup_reports_step_failure() {
        let rhs = |_t: f64, y: &[f64; 1]| [y[0] * y[0]];
        let err = integrate(&rhs, 0.0, 2.0, [1.0], 1e-10).unwrap_err();
        assert!(matches!(err, OdeError::StepFailure { t, .. } if (t - 1.0).abs() < 0.01));
    }

    #[test]
    fn endpoint_is_hit_exactly() {
        let rhs = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let sol = integrate(&rhs, 0.0, 1.2345, [0.3, 0.7], 1e-9).unwrap();
        let times = sol.step_times();
        assert_eq!(*times.last().unwrap(), 1.2345);
        let end = sol.eval(1.2345);
        assert_eq!(end, sol.y_end);
    }

    #[test]
    fn empty_span_is_rejected() {
        let rhs = |_t: f64, y: &[f64; 1]| [-y[0]];
        assert!(matches!(integrate(&rhs, 1.0, 1.0, [1.0], 1e-9), Err(OdeError::BadSpan)));
    }
}
