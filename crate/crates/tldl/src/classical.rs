//! Classical spin in the two canonical charts, Hamilton flows with pole
//! handling, numeric Poisson brackets, the Howland extension that makes
//! periodic and quasi-periodic drives autonomous, and Poincare sections.
//!
//! Chart 1 uses (q, p) = (phi, cos theta); chart 2 uses
//! (q, p) = (-cos theta, phi). Both parametrize the unit sphere and are
//! singular where the compact coordinate reaches +-1, so the flows switch to
//! integrating the spin vector itself near those poles and re-chart on the
//! way out.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fields::FieldConfiguration;
use crate::ode::{DenseSegment, OdeError, Stepper};

const TAU: f64 = std::f64::consts::TAU;
const POLE_ENTER: f64 = 1.0 - 1e-6;
const POLE_EXIT: f64 = 1.0 - 1e-5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassicalError {
    #[error("compact coordinate {0} lies outside [-1, 1]")]
    CoordinateOutOfBounds(f64),
    #[error("tolerance {0} outside the supported range (1e-14, 1e-3)")]
    ToleranceOutOfRange(f64),
    #[error("Howland extension needs a periodic or quasi-periodic drive")]
    ProfileNotAngular,
    #[error("state carries {got} values for {expected} drive angles")]
    AngleArityMismatch { expected: usize, got: usize },
    #[error("section angle index {index} out of range for {arity} drive angles")]
    SectionIndexOutOfRange { index: usize, arity: usize },
    #[error("at least one section crossing must be requested")]
    EmptySectionRequest,
    #[error(transparent)]
    Integration(#[from] OdeError),
}

fn check_tolerance(tol: f64) -> Result<(), ClassicalError> {
    if tol > 1e-14 && tol < 1e-3 {
        Ok(())
    } else {
        Err(ClassicalError::ToleranceOutOfRange(tol))
    }
}

/// The two canonical charts of the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chart {
    #[serde(rename = "chart1")]
    Chart1,
    #[serde(rename = "chart2")]
    Chart2,
}

/// A point of one chart. Chart 1: q is an angle in [0, 2 pi), p in [-1, 1].
/// Chart 2: q in [-1, 1], p an angle in [0, 2 pi).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartState {
    pub chart: Chart,
    pub q: f64,
    pub p: f64,
}

impl ChartState {
    pub fn new(chart: Chart, q: f64, p: f64) -> Result<Self, ClassicalError> {
        match chart {
            Chart::Chart1 => {
                if !(-1.0..=1.0).contains(&p) {
                    return Err(ClassicalError::CoordinateOutOfBounds(p));
                }
                Ok(ChartState { chart, q: q.rem_euclid(TAU), p })
            }
            Chart::Chart2 => {
                if !(-1.0..=1.0).contains(&q) {
                    return Err(ClassicalError::CoordinateOutOfBounds(q));
                }
                Ok(ChartState { chart, q, p: p.rem_euclid(TAU) })
            }
        }
    }

    /// Coordinate whose approach to +-1 signals a chart pole.
    fn pole_coordinate(&self) -> f64 {
        match self.chart {
            Chart::Chart1 => self.p,
            Chart::Chart2 => self.q,
        }
    }
}

fn wrap_clamped(chart: Chart, q: f64, p: f64) -> ChartState {
    match chart {
        Chart::Chart1 => ChartState { chart, q: q.rem_euclid(TAU), p: p.clamp(-1.0, 1.0) },
        Chart::Chart2 => ChartState { chart, q: q.clamp(-1.0, 1.0), p: p.rem_euclid(TAU) },
    }
}

/// Unit spin vector of a chart point.
pub fn spin_from_chart(s: &ChartState) -> [f64; 3] {
    match s.chart {
        Chart::Chart1 => {
            let r = (1.0 - s.p * s.p).max(0.0).sqrt();
            [r * s.q.cos(), r * s.q.sin(), s.p]
        }
        Chart::Chart2 => {
            let r = (1.0 - s.q * s.q).max(0.0).sqrt();
            [r * s.p.cos(), r * s.p.sin(), -s.q]
        }
    }
}

/// Chart point of a spin vector (the z component is clamped to [-1, 1]).
pub fn chart_from_spin(chart: Chart, spin: [f64; 3]) -> ChartState {
    let angle = spin[1].atan2(spin[0]).rem_euclid(TAU);
    match chart {
        Chart::Chart1 => ChartState { chart, q: angle, p: spin[2].clamp(-1.0, 1.0) },
        Chart::Chart2 => ChartState { chart, q: (-spin[2]).clamp(-1.0, 1.0), p: angle },
    }
}

/// H = -B . S evaluated at a chart point.
pub fn hamiltonian_value(s: &ChartState, b: [f64; 3]) -> f64 {
    let spin = spin_from_chart(s);
    -(b[0] * spin[0] + b[1] * spin[1] + b[2] * spin[2])
}

/// Hamilton's equations dq/dt = dH/dp, dp/dt = -dH/dq for H = -B . S.
fn chart_rhs(chart: Chart, y: &[f64; 2], b: [f64; 3]) -> [f64; 2] {
    match chart {
        Chart::Chart1 => {
            let (q, p) = (y[0], y[1]);
            let r = (1.0 - p * p).max(0.0).sqrt();
            [
                (b[0] * q.cos() + b[1] * q.sin()) * p / r - b[2],
                (b[1] * q.cos() - b[0] * q.sin()) * r,
            ]
        }
        Chart::Chart2 => {
            let (q, p) = (y[0], y[1]);
            let r = (1.0 - q * q).max(0.0).sqrt();
            [
                (b[0] * p.sin() - b[1] * p.cos()) * r,
                -(b[0] * p.cos() + b[1] * p.sin()) * q / r - b[2],
            ]
        }
    }
}

fn bloch_rhs(y: &[f64; 3], w: [f64; 3]) -> [f64; 3] {
    [
        -(w[1] * y[2] - w[2] * y[1]),
        -(w[2] * y[0] - w[0] * y[2]),
        -(w[0] * y[1] - w[1] * y[0]),
    ]
}

fn normalized3(y: [f64; 3]) -> [f64; 3] {
    let n = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
    if n == 0.0 {
        y
    } else {
        [y[0] / n, y[1] / n, y[2] / n]
    }
}

#[derive(Debug, Clone)]
enum ChartSeg {
    Chart(DenseSegment<2>),
    Bloch(DenseSegment<3>),
}

impl ChartSeg {
    fn t1(&self) -> f64 {
        match self {
            ChartSeg::Chart(s) => s.t1(),
            ChartSeg::Bloch(s) => s.t1(),
        }
    }
}

/// A chart-coordinate trajectory. Stretches that ran in the spin
/// representation near a pole are projected back into the chart on access.
#[derive(Debug)]
pub struct ChartTrajectory {
    pub chart: Chart,
    times: Vec<f64>,
    states: Vec<ChartState>,
    segments: Vec<ChartSeg>,
    /// Number of times the flow entered the pole neighborhood.
    pub pole_crossings: usize,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    dir: f64,
    s_start: f64,
    s_end: f64,
}

impl ChartTrajectory {
    /// Accepted step boundaries, in integration order.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[ChartState] {
        &self.states
    }

    pub fn eval(&self, t: f64) -> ChartState {
        let s = (self.dir * t).clamp(self.s_start, self.s_end);
        if self.segments.is_empty() {
            return self.states[0];
        }
        let idx = self
            .segments
            .partition_point(|seg| seg.t1() < s)
            .min(self.segments.len() - 1);
        match &self.segments[idx] {
            ChartSeg::Chart(seg) => {
                let y = seg.eval(s);
                wrap_clamped(self.chart, y[0], y[1])
            }
            ChartSeg::Bloch(seg) => chart_from_spin(self.chart, normalized3(seg.eval(s))),
        }
    }

    pub fn sample(&self, ts: &[f64]) -> Vec<ChartState> {
        ts.iter().map(|&t| self.eval(t)).collect()
    }
}

/// Integrates Hamilton's equations for H = -B(t) . S in the given chart,
/// switching to spin-vector integration near the chart poles.
pub fn hamilton_flow(
    cfg: &FieldConfiguration,
    s0: &ChartState,
    t0: f64,
    t1: f64,
    tol: f64,
) -> Result<ChartTrajectory, ClassicalError> {
    check_tolerance(tol)?;
    let chart = s0.chart;
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let (sa, sb) = (dir * t0, dir * t1);
    let rhs2 = move |s: f64, y: &[f64; 2]| {
        let d = chart_rhs(chart, y, cfg.field_at(dir * s));
        [dir * d[0], dir * d[1]]
    };
    let rhs3 = move |s: f64, y: &[f64; 3]| {
        let d = bloch_rhs(y, cfg.omega_vector(dir * s));
        [dir * d[0], dir * d[1], dir * d[2]]
    };

    let mut traj = ChartTrajectory {
        chart,
        times: vec![t0],
        states: vec![*s0],
        segments: Vec::new(),
        pole_crossings: 0,
        accepted_steps: 0,
        rejected_steps: 0,
        dir,
        s_start: sa,
        s_end: sb,
    };

    let mut in_chart = s0.pole_coordinate().abs() <= POLE_ENTER;
    let mut t = sa;
    let mut y2 = [s0.q, s0.p];
    let mut y3 = spin_from_chart(s0);

    while t < sb {
        if in_chart {
            let mut st = Stepper::new(&rhs2, t, y2, tol);
            while st.t < sb {
                let seg = st.step(sb)?;
                traj.segments.push(ChartSeg::Chart(seg));
                let state = wrap_clamped(chart, st.y[0], st.y[1]);
                traj.times.push(dir * st.t);
                traj.states.push(state);
                if state.pole_coordinate().abs() > POLE_ENTER {
                    y3 = spin_from_chart(&state);
                    traj.pole_crossings += 1;
                    in_chart = false;
                    break;
                }
            }
            t = st.t;
            traj.accepted_steps += st.accepted;
            traj.rejected_steps += st.rejected;
        } else {
            let mut st = Stepper::new(&rhs3, t, y3, tol);
            while st.t < sb {
                let seg = st.step(sb)?;
                traj.segments.push(ChartSeg::Bloch(seg));
                let spin = normalized3(st.y);
                let state = chart_from_spin(chart, spin);
                traj.times.push(dir * st.t);
                traj.states.push(state);
                if state.pole_coordinate().abs() < POLE_EXIT {
                    y2 = [state.q, state.p];
                    in_chart = true;
                    break;
                }
            }
            t = st.t;
            traj.accepted_steps += st.accepted;
            traj.rejected_steps += st.rejected;
        }
    }
    Ok(traj)
}

/// Poisson bracket {Fa, Fb} = dFa/dq dFb/dp - dFa/dp dFb/dq by central
/// differences with step (machine epsilon)^(1/3).
pub fn poisson_bracket_numeric(
    fa: &dyn Fn(&ChartState) -> f64,
    fb: &dyn Fn(&ChartState) -> f64,
    s: &ChartState,
) -> f64 {
    let h = f64::EPSILON.powf(1.0 / 3.0);
    let d = |f: &dyn Fn(&ChartState) -> f64, dq: f64, dp: f64| {
        let plus = ChartState { chart: s.chart, q: s.q + h * dq, p: s.p + h * dp };
        let minus = ChartState { chart: s.chart, q: s.q - h * dq, p: s.p - h * dp };
        (f(&plus) - f(&minus)) / (2.0 * h)
    };
    d(fa, 1.0, 0.0) * d(fb, 0.0, 1.0) - d(fa, 0.0, 1.0) * d(fb, 1.0, 0.0)
}

// ---------------------------------------------------------------------------
// Howland extension
// ---------------------------------------------------------------------------

/// Which part of the Hamiltonian is treated as the perturbation. The strong
/// split keeps the drive in the unperturbed part and couples the
/// drive-independent term with strength epsilon; the weak split keeps the
/// epsilon term unperturbed and treats the full drive term as the
/// perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingSplit {
    StrongCoupling,
    WeakCoupling,
}

/// A point of the extended phase space: chart coordinates, one drive angle
/// per base frequency, and their conjugate actions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtendedState {
    pub base: ChartState,
    pub theta: Vec<f64>,
    #[serde(default)]
    pub actions: Vec<f64>,
}

impl ExtendedState {
    /// Actions start at zero; they only shift the extended Hamiltonian by a
    /// constant.
    pub fn new(base: ChartState, theta: Vec<f64>) -> Self {
        let actions = vec![0.0; theta.len()];
        ExtendedState { base, theta, actions }
    }
}

/// Autonomous extension K(q, p, theta, I) = H(q, p, theta) + omega . I of a
/// periodically or quasi-periodically driven chart Hamiltonian, carrying one
/// angle per base frequency.
#[derive(Debug, Clone)]
pub struct HowlandSystem {
    cfg: FieldConfiguration,
    pub chart: Chart,
    pub split: CouplingSplit,
    omega: [f64; 2],
    arity: usize,
    eps_unit: [f64; 3],
    f_shape: [f64; 3],
}

/// Builds the Howland descriptor for an angular drive profile.
pub fn extend_howland(
    cfg: &FieldConfiguration,
    chart: Chart,
    split: CouplingSplit,
) -> Result<HowlandSystem, ClassicalError> {
    let arity = cfg
        .profile
        .angular_arity()
        .ok_or(ClassicalError::ProfileNotAngular)?;
    let omega = cfg.profile.frequencies().expect("angular profile has frequencies");
    let probe = FieldConfiguration {
        epsilon: 1.0,
        layout: cfg.layout,
        profile: cfg.profile.clone(),
    };
    let eps_unit = probe.field_for_drive(0.0);
    let zero = cfg.field_for_drive(0.0);
    let full = cfg.field_for_drive(1.0);
    let f_shape = [full[0] - zero[0], full[1] - zero[1], full[2] - zero[2]];
    Ok(HowlandSystem {
        cfg: cfg.clone(),
        chart,
        split,
        omega,
        arity,
        eps_unit,
        f_shape,
    })
}

#[derive(Debug, Clone)]
enum ExtSeg {
    Chart(DenseSegment<6>),
    Bloch(DenseSegment<7>),
}

impl ExtSeg {
    fn t1(&self) -> f64 {
        match self {
            ExtSeg::Chart(s) => s.t1(),
            ExtSeg::Bloch(s) => s.t1(),
        }
    }
}

/// Trajectory of the extended flow.
#[derive(Debug)]
pub struct ExtendedTrajectory {
    pub chart: Chart,
    arity: usize,
    times: Vec<f64>,
    states: Vec<ExtendedState>,
    segments: Vec<ExtSeg>,
    pub pole_crossings: usize,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    dir: f64,
    s_start: f64,
    s_end: f64,
}

impl ExtendedTrajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[ExtendedState] {
        &self.states
    }

    fn locate(&self, s: f64) -> &ExtSeg {
        let idx = self
            .segments
            .partition_point(|seg| seg.t1() < s)
            .min(self.segments.len() - 1);
        &self.segments[idx]
    }

    fn state_from_raw(&self, chart_part: ChartState, theta: [f64; 2], actions: [f64; 2]) -> ExtendedState {
        ExtendedState {
            base: chart_part,
            theta: theta[..self.arity].iter().map(|a| a.rem_euclid(TAU)).collect(),
            actions: actions[..self.arity].to_vec(),
        }
    }

    pub fn eval(&self, t: f64) -> ExtendedState {
        let s = (self.dir * t).clamp(self.s_start, self.s_end);
        if self.segments.is_empty() {
            return self.states[0].clone();
        }
        match self.locate(s) {
            ExtSeg::Chart(seg) => {
                let y = seg.eval(s);
                self.state_from_raw(
                    wrap_clamped(self.chart, y[0], y[1]),
                    [y[2], y[3]],
                    [y[4], y[5]],
                )
            }
            ExtSeg::Bloch(seg) => {
                let y = seg.eval(s);
                let spin = normalized3([y[0], y[1], y[2]]);
                self.state_from_raw(
                    chart_from_spin(self.chart, spin),
                    [y[3], y[4]],
                    [y[5], y[6]],
                )
            }
        }
    }

    pub fn sample(&self, ts: &[f64]) -> Vec<ExtendedState> {
        ts.iter().map(|&t| self.eval(t)).collect()
    }
}

/// One Poincare-section crossing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoincarePoint {
    pub t: f64,
    pub q: f64,
    pub p: f64,
    /// The non-section angle at the crossing (zero for periodic drives).
    pub theta2: f64,
}

impl HowlandSystem {
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn omega(&self) -> [f64; 2] {
        self.omega
    }

    /// Strength multiplying the perturbation term V in K = H0 + coupling V.
    pub fn coupling(&self) -> f64 {
        match self.split {
            CouplingSplit::StrongCoupling => self.cfg.epsilon,
            CouplingSplit::WeakCoupling => 1.0,
        }
    }

    fn padded(&self, s: &ExtendedState) -> Result<([f64; 2], [f64; 2]), ClassicalError> {
        if s.theta.len() != self.arity {
            return Err(ClassicalError::AngleArityMismatch {
                expected: self.arity,
                got: s.theta.len(),
            });
        }
        if !s.actions.is_empty() && s.actions.len() != self.arity {
            return Err(ClassicalError::AngleArityMismatch {
                expected: self.arity,
                got: s.actions.len(),
            });
        }
        let mut theta = [0.0; 2];
        let mut actions = [0.0; 2];
        for i in 0..self.arity {
            theta[i] = s.theta[i];
            if !s.actions.is_empty() {
                actions[i] = s.actions[i];
            }
        }
        Ok((theta, actions))
    }

    fn drive(&self, theta: [f64; 2]) -> f64 {
        self.cfg
            .profile
            .angular_value(theta)
            .expect("angular profile")
    }

    fn gradient(&self, theta: [f64; 2]) -> [f64; 2] {
        self.cfg
            .profile
            .angular_gradient(theta)
            .expect("angular profile")
    }

    fn field(&self, theta: [f64; 2]) -> [f64; 3] {
        let f = self.drive(theta);
        let e = self.cfg.epsilon;
        [
            e * self.eps_unit[0] + f * self.f_shape[0],
            e * self.eps_unit[1] + f * self.f_shape[1],
            e * self.eps_unit[2] + f * self.f_shape[2],
        ]
    }

    /// The unperturbed part, including the omega . I term.
    pub fn h0_value(&self, s: &ExtendedState) -> Result<f64, ClassicalError> {
        let (theta, actions) = self.padded(s)?;
        let spin = spin_from_chart(&s.base);
        let wi = self.omega[0] * actions[0] + self.omega[1] * actions[1];
        Ok(match self.split {
            CouplingSplit::StrongCoupling => {
                let f = self.drive(theta);
                -f * (self.f_shape[0] * spin[0]
                    + self.f_shape[1] * spin[1]
                    + self.f_shape[2] * spin[2])
                    + wi
            }
            CouplingSplit::WeakCoupling => {
                let e = self.cfg.epsilon;
                -e * (self.eps_unit[0] * spin[0]
                    + self.eps_unit[1] * spin[1]
                    + self.eps_unit[2] * spin[2])
                    + wi
            }
        })
    }

    /// The perturbation shape; K = H0 + coupling() * V.
    pub fn v_value(&self, s: &ExtendedState) -> Result<f64, ClassicalError> {
        let (theta, _) = self.padded(s)?;
        let spin = spin_from_chart(&s.base);
        Ok(match self.split {
            CouplingSplit::StrongCoupling => {
                -(self.eps_unit[0] * spin[0]
                    + self.eps_unit[1] * spin[1]
                    + self.eps_unit[2] * spin[2])
            }
            CouplingSplit::WeakCoupling => {
                let f = self.drive(theta);
                -f * (self.f_shape[0] * spin[0]
                    + self.f_shape[1] * spin[1]
                    + self.f_shape[2] * spin[2])
            }
        })
    }

    /// Full extended Hamiltonian K = -B(theta) . S + omega . I.
    pub fn k_value(&self, s: &ExtendedState) -> Result<f64, ClassicalError> {
        Ok(self.h0_value(s)? + self.coupling() * self.v_value(s)?)
    }

    /// Integrates the extended flow. The drive angles advance exactly as
    /// theta(t) = theta0 + omega (t - t0); the chart part switches to
    /// spin-vector integration near poles like [`hamilton_flow`].
    pub fn flow(
        &self,
        s0: &ExtendedState,
        t0: f64,
        t1: f64,
        tol: f64,
    ) -> Result<ExtendedTrajectory, ClassicalError> {
        check_tolerance(tol)?;
        let (theta0, actions0) = self.padded(s0)?;
        let chart = s0.base.chart;
        let dir = if t1 >= t0 { 1.0 } else { -1.0 };
        let (sa, sb) = (dir * t0, dir * t1);
        let omega = self.omega;
        let sys = self;

        let rhs6 = move |_s: f64, y: &[f64; 6]| {
            let theta = [y[2], y[3]];
            let b = sys.field(theta);
            let d = chart_rhs(chart, &[y[0], y[1]], b);
            let g = sys.gradient(theta);
            let spin = spin_from_chart(&ChartState { chart, q: y[0], p: y[1] });
            let w = sys.f_shape[0] * spin[0] + sys.f_shape[1] * spin[1] + sys.f_shape[2] * spin[2];
            [
                dir * d[0],
                dir * d[1],
                dir * omega[0],
                dir * omega[1],
                dir * g[0] * w,
                dir * g[1] * w,
            ]
        };
        let rhs7 = move |_s: f64, y: &[f64; 7]| {
            let theta = [y[3], y[4]];
            let b = sys.field(theta);
            let spin = [y[0], y[1], y[2]];
            let d = bloch_rhs(&spin, b);
            let g = sys.gradient(theta);
            let w = sys.f_shape[0] * spin[0] + sys.f_shape[1] * spin[1] + sys.f_shape[2] * spin[2];
            [
                dir * d[0],
                dir * d[1],
                dir * d[2],
                dir * omega[0],
                dir * omega[1],
                dir * g[0] * w,
                dir * g[1] * w,
            ]
        };

        let mut traj = ExtendedTrajectory {
            chart,
            arity: self.arity,
            times: vec![t0],
            states: vec![ExtendedState {
                base: s0.base,
                theta: s0.theta.clone(),
                actions: actions0[..self.arity].to_vec(),
            }],
            segments: Vec::new(),
            pole_crossings: 0,
            accepted_steps: 0,
            rejected_steps: 0,
            dir,
            s_start: sa,
            s_end: sb,
        };

        let exact_theta = |t_int: f64, j: usize| theta0[j] + omega[j] * (dir * t_int - t0);

        let mut in_chart = s0.base.pole_coordinate().abs() <= POLE_ENTER;
        let mut t = sa;
        let mut y6 = [s0.base.q, s0.base.p, theta0[0], theta0[1], actions0[0], actions0[1]];
        let spin0 = spin_from_chart(&s0.base);
        let mut y7 = [
            spin0[0], spin0[1], spin0[2], theta0[0], theta0[1], actions0[0], actions0[1],
        ];

        while t < sb {
            if in_chart {
                let mut st = Stepper::new(&rhs6, t, y6, tol);
                while st.t < sb {
                    let seg = st.step(sb)?;
                    traj.segments.push(ExtSeg::Chart(seg));
                    st.y[2] = exact_theta(st.t, 0);
                    st.y[3] = exact_theta(st.t, 1);
                    let state = traj.state_from_raw(
                        wrap_clamped(chart, st.y[0], st.y[1]),
                        [st.y[2], st.y[3]],
                        [st.y[4], st.y[5]],
                    );
                    traj.times.push(dir * st.t);
                    let pole = state.base.pole_coordinate().abs();
                    traj.states.push(state);
                    if pole > POLE_ENTER {
                        let spin = spin_from_chart(&wrap_clamped(chart, st.y[0], st.y[1]));
                        y7 = [spin[0], spin[1], spin[2], st.y[2], st.y[3], st.y[4], st.y[5]];
                        traj.pole_crossings += 1;
                        in_chart = false;
                        break;
                    }
                }
                t = st.t;
                traj.accepted_steps += st.accepted;
                traj.rejected_steps += st.rejected;
            } else {
                let mut st = Stepper::new(&rhs7, t, y7, tol);
                while st.t < sb {
                    let seg = st.step(sb)?;
                    traj.segments.push(ExtSeg::Bloch(seg));
                    st.y[3] = exact_theta(st.t, 0);
                    st.y[4] = exact_theta(st.t, 1);
                    let spin = normalized3([st.y[0], st.y[1], st.y[2]]);
                    let state = traj.state_from_raw(
                        chart_from_spin(chart, spin),
                        [st.y[3], st.y[4]],
                        [st.y[5], st.y[6]],
                    );
                    traj.times.push(dir * st.t);
                    let pole = state.base.pole_coordinate().abs();
                    traj.states.push(state.clone());
                    if pole < POLE_EXIT {
                        y6 = [state.base.q, state.base.p, st.y[3], st.y[4], st.y[5], st.y[6]];
                        in_chart = true;
                        break;
                    }
                }
                t = st.t;
                traj.accepted_steps += st.accepted;
                traj.rejected_steps += st.rejected;
            }
        }
        Ok(traj)
    }

    /// Strobes the flow where the chosen drive angle passes 0 mod 2 pi,
    /// returning exactly `n_crossings` section points in time order.
    pub fn poincare_section(
        &self,
        s0: &ExtendedState,
        n_crossings: usize,
        section_angle_index: usize,
        tol: f64,
    ) -> Result<Vec<PoincarePoint>, ClassicalError> {
        if n_crossings == 0 {
            return Err(ClassicalError::EmptySectionRequest);
        }
        if section_angle_index >= self.arity {
            return Err(ClassicalError::SectionIndexOutOfRange {
                index: section_angle_index,
                arity: self.arity,
            });
        }
        let (theta0, _) = self.padded(s0)?;
        let w_sec = self.omega[section_angle_index];
        let th0 = theta0[section_angle_index].rem_euclid(TAU);
        let t0 = 0.0;
        let period = TAU / w_sec;
        let t_last = t0 + (TAU * n_crossings as f64 - th0) / w_sec;
        let traj = self.flow(s0, t0, t_last + 1e-6 * period, tol)?;

        let other = 1 - section_angle_index;
        let mut points = Vec::with_capacity(n_crossings);
        for k in 1..=n_crossings {
            let mut t = t0 + (TAU * k as f64 - th0) / w_sec;
            let seg = traj.locate(t);
            let theta_at = |tt: f64| match seg {
                ExtSeg::Chart(s) => s.eval(tt)[2 + section_angle_index],
                ExtSeg::Bloch(s) => s.eval(tt)[3 + section_angle_index],
            };
            for _ in 0..4 {
                let g = theta_at(t) - TAU * k as f64;
                if g.abs() <= 1e-12 {
                    break;
                }
                t -= g / w_sec;
            }
            let state = traj.eval(t);
            let theta2 = if self.arity == 2 {
                (theta0[other] + self.omega[other] * (t - t0)).rem_euclid(TAU)
            } else {
                0.0
            };
            points.push(PoincarePoint { t, q: state.base.q, p: state.base.p, theta2 });
        }
        Ok(points)
    }
}
