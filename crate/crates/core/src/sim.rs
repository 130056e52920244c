//! Fixed-step RK4 integration of prescribed strokes.
//!
//! The shape follows the stroke exactly; only the pose is integrated. Steps
//! never straddle a stroke knot, so the piecewise-constant shape rate keeps
//! the scheme fourth order.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DVector, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::greens::Vec3;
use crate::swimmer::{self, FieldOptions, FourSphereState, SwimmerParams, ThreeSphereState};

/// Piecewise-linear shape path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stroke {
    pub times: Vec<f64>,
    pub shapes: Vec<Vec<f64>>,
}

impl Stroke {
    pub fn new(times: Vec<f64>, shapes: Vec<Vec<f64>>) -> Result<Self> {
        if times.is_empty() || times.len() != shapes.len() {
            return Err(Error::Argument("stroke needs matching, nonempty knot times and shapes".into()));
        }
        let d = shapes[0].len();
        if shapes.iter().any(|s| s.len() != d || s.iter().any(|v| !v.is_finite())) {
            return Err(Error::Argument("stroke shapes must be finite with a common dimension".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|t| !t.is_finite()) {
            return Err(Error::Argument("stroke knot times must be finite and strictly increasing".into()));
        }
        Ok(Self { times, shapes })
    }

    /// Stroke through `shapes` at unit shape-space speed (Euclidean arc length as time).
    /// Repeated consecutive shapes are merged.
    pub fn through(shapes: &[Vec<f64>]) -> Result<Self> {
        let mut times = Vec::new();
        let mut out: Vec<Vec<f64>> = Vec::new();
        let mut t = 0.0;
        for s in shapes {
            if let Some(prev) = out.last() {
                let d = dist(prev, s);
                if d == 0.0 {
                    continue;
                }
                t += d;
            }
            times.push(t);
            out.push(s.clone());
        }
        Self::new(times, out)
    }

    pub fn constant(shape: Vec<f64>, duration: f64) -> Result<Self> {
        Self::new(vec![0.0, duration], vec![shape.clone(), shape])
    }

    pub fn dim(&self) -> usize {
        self.shapes[0].len()
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn duration(&self) -> f64 {
        self.times[self.times.len() - 1] - self.times[0]
    }

    pub fn first(&self) -> &[f64] {
        &self.shapes[0]
    }

    pub fn last(&self) -> &[f64] {
        &self.shapes[self.shapes.len() - 1]
    }

    fn segment(&self, t: f64) -> usize {
        let n = self.times.len();
        if n < 2 {
            return 0;
        }
        match self.times.binary_search_by(|v| v.total_cmp(&t)) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }

    pub fn shape_at(&self, t: f64) -> Vec<f64> {
        if self.times.len() == 1 {
            return self.shapes[0].clone();
        }
        let i = self.segment(t);
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let u = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
        self.shapes[i].iter().zip(&self.shapes[i + 1]).map(|(a, b)| a + u * (b - a)).collect()
    }

    /// Shape rate on the segment containing `t` (right-continuous).
    pub fn rate_at(&self, t: f64) -> Vec<f64> {
        if self.times.len() == 1 {
            return vec![0.0; self.dim()];
        }
        let i = self.segment(t);
        let dt = self.times[i + 1] - self.times[i];
        self.shapes[i].iter().zip(&self.shapes[i + 1]).map(|(a, b)| (b - a) / dt).collect()
    }

    /// The same path traversed backwards, starting at time 0.
    pub fn reversed(&self) -> Self {
        let end = self.times[self.times.len() - 1];
        let times = self.times.iter().rev().map(|t| end - t).collect();
        let shapes = self.shapes.iter().rev().cloned().collect();
        Self { times, shapes }
    }

    /// Go out along `self`, then retrace it.
    pub fn out_and_back(&self) -> Self {
        let mut s = self.clone();
        s.append(&self.reversed()).expect("stroke ends where its reverse starts");
        s
    }

    /// Appends `other`, shifted in time to start where `self` ends. The shapes must match at the seam.
    pub fn append(&mut self, other: &Stroke) -> Result<()> {
        if dist(self.last(), other.first()) > 1e-12 * (1.0 + norm(self.last())) {
            return Err(Error::Argument("appended stroke does not start at the current end shape".into()));
        }
        let shift = self.times[self.times.len() - 1] - other.times[0];
        for (t, s) in other.times.iter().zip(&other.shapes).skip(1) {
            self.times.push(t + shift);
            self.shapes.push(s.clone());
        }
        Ok(())
    }

    /// Time axis scaled by `k` (`k < 1` is faster).
    pub fn time_scaled(&self, k: f64) -> Self {
        Self { times: self.times.iter().map(|t| t * k).collect(), shapes: self.shapes.clone() }
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// A swimmer whose pose can be integrated along a stroke.
pub trait Swimmer: Clone + Send + Sync {
    fn shape(&self) -> Vec<f64>;
    fn with_shape(&self, xi: &[f64]) -> Self;
    /// Pose rate for a shape rate.
    fn pose_rate(&self, xi_dot: &[f64], params: &SwimmerParams, opts: &FieldOptions) -> Result<DVector<f64>>;
    /// State at chart coordinate `d` around `self` (`d = 0` is `self`).
    fn retract(&self, d: &DVector<f64>) -> Self;
    /// Chart-coordinate rate at `d` for a pose rate.
    fn chart_rate(&self, d: &DVector<f64>, pose_rate: &DVector<f64>) -> DVector<f64>;
    fn pose_dim(&self) -> usize;
    fn violations(&self, params: &SwimmerParams) -> Vec<String>;
    /// Final minus initial pose; rotations reported in `(-pi, pi]`.
    fn pose_delta(&self, from: &Self) -> DVector<f64>;
    fn csv_header() -> &'static str;
    fn csv_fields(&self) -> Vec<f64>;
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(t: f64) -> f64 {
    let r = t.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

impl Swimmer for ThreeSphereState {
    fn shape(&self) -> Vec<f64> {
        vec![self.xi1, self.xi2]
    }

    fn with_shape(&self, xi: &[f64]) -> Self {
        ThreeSphereState::with_shape(self, [xi[0], xi[1]])
    }

    fn pose_rate(&self, xi_dot: &[f64], params: &SwimmerParams, opts: &FieldOptions) -> Result<DVector<f64>> {
        let w = swimmer::three_sphere_pose_rates(self, params, opts)?;
        let v = w * nalgebra::Vector2::new(xi_dot[0], xi_dot[1]);
        Ok(DVector::from_column_slice(v.as_slice()))
    }

    fn retract(&self, d: &DVector<f64>) -> Self {
        Self { x: self.x + d[0], y: self.y + d[1], theta: self.theta + d[2], ..*self }
    }

    fn chart_rate(&self, _d: &DVector<f64>, pose_rate: &DVector<f64>) -> DVector<f64> {
        pose_rate.clone()
    }

    fn pose_dim(&self) -> usize {
        3
    }

    fn violations(&self, params: &SwimmerParams) -> Vec<String> {
        ThreeSphereState::violations(self, params)
    }

    fn pose_delta(&self, from: &Self) -> DVector<f64> {
        DVector::from_vec(vec![self.x - from.x, self.y - from.y, wrap_angle(self.theta - from.theta)])
    }

    fn csv_header() -> &'static str {
        "t,xi1,xi2,x,y,theta"
    }

    fn csv_fields(&self) -> Vec<f64> {
        vec![self.xi1, self.xi2, self.x, self.y, self.theta]
    }
}

impl Swimmer for FourSphereState {
    fn shape(&self) -> Vec<f64> {
        self.xi.to_vec()
    }

    fn with_shape(&self, xi: &[f64]) -> Self {
        Self { xi: [xi[0], xi[1], xi[2], xi[3]], ..*self }
    }

    fn pose_rate(&self, xi_dot: &[f64], params: &SwimmerParams, opts: &FieldOptions) -> Result<DVector<f64>> {
        let w = swimmer::four_sphere_pose_rates(self, params, opts)?;
        Ok(w * DVector::from_column_slice(xi_dot))
    }

    fn retract(&self, d: &DVector<f64>) -> Self {
        let rho = Vector3::new(d[3], d[4], d[5]);
        Self {
            xi: self.xi,
            c: self.c + Vec3::new(d[0], d[1], d[2]),
            orient: self.orient * UnitQuaternion::from_scaled_axis(rho),
        }
        .renormalized()
    }

    fn chart_rate(&self, d: &DVector<f64>, pose_rate: &DVector<f64>) -> DVector<f64> {
        let rho = Vector3::new(d[3], d[4], d[5]);
        let omega = Vector3::new(pose_rate[3], pose_rate[4], pose_rate[5]);
        let r = swimmer::right_jacobian_inverse(&rho) * omega;
        DVector::from_vec(vec![pose_rate[0], pose_rate[1], pose_rate[2], r[0], r[1], r[2]])
    }

    fn pose_dim(&self) -> usize {
        6
    }

    fn violations(&self, params: &SwimmerParams) -> Vec<String> {
        FourSphereState::violations(self, params)
    }

    fn pose_delta(&self, from: &Self) -> DVector<f64> {
        let dc = self.c - from.c;
        let rot = (from.orient.inverse() * self.orient).scaled_axis();
        DVector::from_vec(vec![dc.x, dc.y, dc.z, rot.x, rot.y, rot.z])
    }

    fn csv_header() -> &'static str {
        "t,xi1,xi2,xi3,xi4,cx,cy,cz,qw,qx,qy,qz"
    }

    fn csv_fields(&self) -> Vec<f64> {
        let q = self.orient.quaternion();
        let mut v = self.xi.to_vec();
        v.extend([self.c.x, self.c.y, self.c.z, q.w, q.i, q.j, q.k]);
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct IntegratorStats {
    pub steps: usize,
    pub field_evaluations: usize,
}

#[derive(Debug, Clone)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    pub stats: IntegratorStats,
}

impl<S: Swimmer> Trajectory<S> {
    pub fn first(&self) -> &S {
        &self.states[0]
    }

    pub fn last(&self) -> &S {
        &self.states[self.states.len() - 1]
    }

    /// Writes `t` and the state columns with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", S::csv_header())?;
        for (t, s) in self.times.iter().zip(&self.states) {
            let mut line = fmt17(*t);
            for v in s.csv_fields() {
                line.push(',');
                line.push_str(&fmt17(v));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// Round-trip formatting with 17 significant digits.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Final minus initial pose of a trajectory.
pub fn net_displacement<S: Swimmer>(traj: &Trajectory<S>) -> DVector<f64> {
    traj.last().pose_delta(traj.first())
}

/// Violations of the admissible set; empty when admissible.
pub fn validate_state<S: Swimmer>(state: &S, params: &SwimmerParams) -> Vec<String> {
    state.violations(params)
}

/// Integration settings.
#[derive(Debug, Clone, Copy)]
pub struct SimOptions {
    pub dt: f64,
    pub fields: FieldOptions,
    /// Keep every step in the trajectory (otherwise only the end points).
    pub record: bool,
}

impl SimOptions {
    pub fn new(dt: f64, wall: bool) -> Self {
        Self { dt, fields: FieldOptions::with_wall(wall), record: true }
    }
}

/// Default step: the stroke duration over 4096.
pub fn default_dt(stroke: &Stroke) -> f64 {
    stroke.duration() / 4096.0
}

/// Integrates the pose along `stroke`, starting from `state0` with its shape
/// replaced by the stroke's initial shape.
pub fn integrate<S: Swimmer>(state0: &S, stroke: &Stroke, params: &SwimmerParams, opts: &SimOptions) -> Result<Trajectory<S>> {
    if !(opts.dt > 0.0) {
        return Err(Error::Argument(format!("time step must be positive, got {}", opts.dt)));
    }
    if stroke.dim() != state0.shape().len() {
        return Err(Error::Argument("stroke dimension does not match the swimmer".into()));
    }
    let mut state = state0.with_shape(stroke.first());
    let v = state.violations(params);
    if !v.is_empty() {
        return Err(Error::Inadmissible(v));
    }
    let mut stats = IntegratorStats::default();
    let mut times = vec![stroke.start()];
    let mut states = vec![state.clone()];
    let np = state.pose_dim();
    for seg in 0..stroke.times.len().saturating_sub(1) {
        let (t0, t1) = (stroke.times[seg], stroke.times[seg + 1]);
        let (x0, x1) = (&stroke.shapes[seg], &stroke.shapes[seg + 1]);
        let len = t1 - t0;
        let rate: Vec<f64> = x0.iter().zip(x1).map(|(a, b)| (b - a) / len).collect();
        let n = ((len / opts.dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        let h = len / n as f64;
        let still = rate.iter().all(|r| *r == 0.0);
        for k in 0..n {
            let ta = t0 + k as f64 * h;
            let shape_at = |t: f64| -> Vec<f64> {
                let u = (t - t0) / len;
                x0.iter().zip(x1).map(|(a, b)| a + u * (b - a)).collect()
            };
            let base = state.with_shape(&shape_at(ta));
            let end_shape = if k + 1 == n { x1.clone() } else { shape_at(ta + h) };
            if still {
                state = base.with_shape(&end_shape);
            } else {
                let f = |d: &DVector<f64>, t: f64, stats: &mut IntegratorStats| -> Result<DVector<f64>> {
                    let s = base.retract(d).with_shape(&shape_at(t));
                    stats.field_evaluations += 1;
                    let p = s.pose_rate(&rate, params, &opts.fields)?;
                    Ok(base.chart_rate(d, &p))
                };
                let z = DVector::zeros(np);
                let k1 = f(&z, ta, &mut stats)?;
                let k2 = f(&(&z + 0.5 * h * &k1), ta + 0.5 * h, &mut stats)?;
                let k3 = f(&(&z + 0.5 * h * &k2), ta + 0.5 * h, &mut stats)?;
                let k4 = f(&(&z + h * &k3), ta + h, &mut stats)?;
                let d = (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                state = base.retract(&d).with_shape(&end_shape);
            }
            stats.steps += 1;
            let v = state.violations(params);
            if !v.is_empty() {
                return Err(Error::Inadmissible(v));
            }
            if opts.record || (k + 1 == n && seg + 2 == stroke.times.len()) {
                times.push(if k + 1 == n { t1 } else { ta + h });
                states.push(state.clone());
            }
        }
    }
    Ok(Trajectory { times, states, stats })
}

/// Three-sphere convenience wrapper with the default step `T / 4096`.
pub fn simulate_three_sphere(s: &ThreeSphereState, stroke: &Stroke, params: &SwimmerParams, wall: bool) -> Result<Trajectory<ThreeSphereState>> {
    integrate(s, stroke, params, &SimOptions::new(default_dt(stroke), wall))
}
