//! Local motion planning for the three-sphere swimmer.
//!
//! A plan visits three loop centres in shape space (out and back from the
//! start shape), runs a number of square loops at each, then moves straight to
//! the target shape. The signed loop areas are the pose controls: to leading
//! order a loop of signed area `A` at centre `c` moves the pose by
//! `A [F1, F2](c)`. The areas are corrected by damped least squares against
//! forward simulation, with Broyden updates of the bracket Jacobian.

use nalgebra::{DVector, Matrix3, Vector3};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::liealg::{self, FieldHandle, RankOptions};
use crate::sim::{self, SimOptions, Stroke};
use crate::swimmer::{FieldOptions, SwimmerParams, ThreeSphereState};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlannerOptions {
    /// Target tolerance on the pose error `|(dx, dy, dtheta)|`.
    pub tol: f64,
    /// Shooting iterations (forward simulations) allowed per leg.
    pub budget: usize,
    /// Integration step; plans run at unit shape-space speed.
    pub dt: f64,
    /// Loop side cap as a fraction of the smaller arm at the loop centre.
    pub amplitude_fraction: f64,
    /// Largest pose change attempted in one leg.
    pub trust_radius: f64,
    /// Candidate loop centres per shape axis.
    pub grid: usize,
    /// Candidate arms range up to this multiple of the larger start arm.
    pub max_arm_factor: f64,
    pub wall: bool,
    pub rank: RankOptions,
}

impl Default for PlannerOptions {
    fn default() -> Self {
        Self {
            tol: 1e-4,
            budget: 50,
            dt: 0.02,
            amplitude_fraction: 0.2,
            trust_radius: 1e-2,
            grid: 6,
            max_arm_factor: 2.5,
            wall: true,
            rank: RankOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Primitive {
    ShapeMove { from: [f64; 2], to: [f64; 2], t0: f64, t1: f64 },
    BracketLoop { centre: [f64; 2], pair: [usize; 2], amplitude: f64, repeats: usize, t0: f64, t1: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct Plan {
    pub start: ThreeSphereState,
    pub target: ThreeSphereState,
    pub primitives: Vec<Primitive>,
    pub stroke: Stroke,
    pub predicted_final: ThreeSphereState,
    pub error: f64,
    pub converged: bool,
    /// Shooting iterations over all legs.
    pub iterations: usize,
    /// Forward simulations over all legs, including secant columns.
    pub simulations: usize,
    pub legs: usize,
    /// Error after each accepted iteration.
    pub error_history: Vec<f64>,
    pub dt: f64,
    pub wall: bool,
}

impl Plan {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serialises")
    }
}

/// Pose error `(dx, dy, dtheta)` from `s` to `target`, angle wrapped.
pub fn pose_residual(s: &ThreeSphereState, target: &ThreeSphereState) -> Vector3<f64> {
    Vector3::new(target.x - s.x, target.y - s.y, sim::wrap_angle(target.theta - s.theta))
}

fn square(centre: [f64; 2], pair: [usize; 2], amplitude: f64) -> Vec<Vec<f64>> {
    let e = 0.5 * amplitude.abs();
    let (i, j) = if amplitude >= 0.0 { (pair[0], pair[1]) } else { (pair[1], pair[0]) };
    let at = |u: f64, v: f64| {
        let mut p = centre.to_vec();
        p[i] += u;
        p[j] += v;
        p
    };
    vec![centre.to_vec(), at(e, 0.0), at(e, e), at(-e, e), at(-e, -e), at(e, -e), at(e, 0.0), centre.to_vec()]
}

/// Closed square loop of side `|amplitude|` in shape coordinates `pair`,
/// centred on the current shape and entered along a spoke from the centre.
/// Negative amplitudes reverse the orientation. The pose moves by
/// `amplitude |amplitude| [F_i, F_j]` up to fourth order in the side.
pub fn bracket_loop(center: &ThreeSphereState, pair: (usize, usize), amplitude: f64, params: &SwimmerParams) -> Result<Stroke> {
    if pair.0 > 1 || pair.1 > 1 || pair.0 == pair.1 {
        return Err(Error::Argument(format!("loop pair must be two distinct shape indices in 0..2, got {pair:?}")));
    }
    let c = center.shape();
    if amplitude == 0.0 {
        return Stroke::new(vec![0.0], vec![c.to_vec()]);
    }
    let pts = square(c, [pair.0, pair.1], amplitude);
    for p in &pts {
        let v = center.with_shape([p[0], p[1]]).violations(params);
        if !v.is_empty() {
            return Err(Error::Inadmissible(v));
        }
    }
    Stroke::through(&pts)
}

struct Centre {
    shape: [f64; 2],
    cap: f64,
    /// Pose components of `[F1, F2]` at the centre.
    bracket: Vector3<f64>,
}

struct Shot {
    stroke: Stroke,
    prims: Vec<Primitive>,
    fin: ThreeSphereState,
    residual: Vector3<f64>,
}

struct Leg {
    stroke: Stroke,
    primitives: Vec<Primitive>,
    final_state: ThreeSphereState,
    iterations: usize,
    simulations: usize,
    history: Vec<f64>,
}

struct Planner<'a> {
    params: &'a SwimmerParams,
    opts: &'a PlannerOptions,
    fields: FieldOptions,
}

impl Planner<'_> {
    fn sim_opts(&self) -> SimOptions {
        SimOptions { dt: self.opts.dt, fields: self.fields, record: false }
    }

    fn bracket_at(&self, handles: &[FieldHandle; 2], s: &ThreeSphereState) -> Result<Vector3<f64>> {
        let x = DVector::from_column_slice(s.to_vector().as_slice());
        let b = liealg::lie_bracket(&handles[0], &handles[1], &x, self.opts.rank.step)?;
        Ok(Vector3::new(b[2], b[3], b[4]))
    }

    /// Admissible loop centres on a grid, with their per-area pose response.
    fn candidates(&self, s0: &ThreeSphereState) -> Result<Vec<Centre>> {
        let a = self.params.a;
        let g = self.opts.grid.max(2);
        let lo = 3.0 * a;
        let hi = self.opts.max_arm_factor * s0.xi1.max(s0.xi2);
        let strict = SwimmerParams { a: 1.25 * a, ..*self.params };
        let handles = liealg::three_sphere_handles(*self.params, self.fields);
        let mut out = Vec::new();
        for i in 0..g {
            for j in 0..g {
                let c = [lo + (hi - lo) * i as f64 / (g - 1) as f64, lo + (hi - lo) * j as f64 / (g - 1) as f64];
                let cap = self.opts.amplitude_fraction * c[0].min(c[1]);
                // room for loops twice the cap, checked with inflated spheres
                let ok = square(c, [0, 1], 2.0 * cap).iter().all(|p| s0.with_shape([p[0], p[1]]).violations(&strict).is_empty());
                if !ok {
                    continue;
                }
                let bracket = self.bracket_at(&handles, &s0.with_shape(c))?;
                out.push(Centre { shape: c, cap, bracket });
            }
        }
        Ok(out)
    }

    /// Three centres whose per-loop responses are best conditioned.
    fn choose(&self, cands: Vec<Centre>) -> Result<[Centre; 3]> {
        let n = cands.len();
        let mut best: Option<(f64, [usize; 3])> = None;
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let m = Matrix3::from_columns(&[
                        cands[i].bracket * cands[i].cap.powi(2),
                        cands[j].bracket * cands[j].cap.powi(2),
                        cands[k].bracket * cands[k].cap.powi(2),
                    ]);
                    let s = m.singular_values().min();
                    if best.map_or(true, |(b, _)| s > b) {
                        best = Some((s, [i, j, k]));
                    }
                }
            }
        }
        let (_, idx) = best.ok_or_else(|| Error::Degenerate("fewer than three admissible loop centres".into()))?;
        let mut cands: Vec<Option<Centre>> = cands.into_iter().map(Some).collect();
        Ok(idx.map(|i| cands[i].take().unwrap()))
    }

    fn build(&self, s0: &ThreeSphereState, target: &ThreeSphereState, centres: &[Centre; 3], areas: &Vector3<f64>, repeats: &[usize; 3]) -> Result<(Stroke, Vec<Primitive>)> {
        let xi0 = s0.shape().to_vec();
        let mut stroke = Stroke::new(vec![0.0], vec![xi0.clone()])?;
        let mut prims = Vec::new();
        let move_to = |stroke: &mut Stroke, prims: &mut Vec<Primitive>, to: &[f64]| -> Result<()> {
            let from = stroke.last().to_vec();
            if from.as_slice() == to {
                return Ok(());
            }
            let t0 = stroke.times[stroke.times.len() - 1];
            stroke.append(&Stroke::through(&[from.clone(), to.to_vec()])?)?;
            prims.push(Primitive::ShapeMove { from: [from[0], from[1]], to: [to[0], to[1]], t0, t1: stroke.times[stroke.times.len() - 1] });
            Ok(())
        };
        for (k, c) in centres.iter().enumerate() {
            if repeats[k] == 0 || areas[k] == 0.0 {
                continue;
            }
            move_to(&mut stroke, &mut prims, &c.shape)?;
            let amp = areas[k].signum() * (areas[k].abs() / repeats[k] as f64).sqrt();
            let one = Stroke::through(&square(c.shape, [0, 1], amp))?;
            let t0 = stroke.times[stroke.times.len() - 1];
            for _ in 0..repeats[k] {
                stroke.append(&one)?;
            }
            prims.push(Primitive::BracketLoop {
                centre: c.shape,
                pair: [0, 1],
                amplitude: amp,
                repeats: repeats[k],
                t0,
                t1: stroke.times[stroke.times.len() - 1],
            });
            move_to(&mut stroke, &mut prims, &xi0)?;
        }
        move_to(&mut stroke, &mut prims, &target.shape())?;
        Ok((stroke, prims))
    }

    fn run(&self, s0: &ThreeSphereState, stroke: &Stroke) -> Result<ThreeSphereState> {
        Ok(sim::integrate(s0, stroke, self.params, &self.sim_opts())?.last().clone())
    }

    /// Final state for given loop areas, `None` when the stroke leaves the admissible set.
    fn shoot(&self, s0: &ThreeSphereState, target: &ThreeSphereState, centres: &[Centre; 3], areas: &Vector3<f64>, repeats: &[usize; 3]) -> Result<Option<Shot>> {
        let (stroke, prims) = match self.build(s0, target, centres, areas, repeats) {
            Ok(v) => v,
            Err(Error::Inadmissible(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        match self.run(s0, &stroke) {
            Ok(f) => Ok(Some(Shot { stroke, prims, residual: pose_residual(&f, target), fin: f })),
            Err(Error::Inadmissible(_)) => Ok(None),
            Err(e) => Err(e),
        }
    }

    /// Secant Jacobian of the pose residual in the loop areas, columns in parallel.
    fn secant(&self, s0: &ThreeSphereState, target: &ThreeSphereState, centres: &[Centre; 3], base: &Shot, areas: &Vector3<f64>, repeats: &[usize; 3], delta: &Vector3<f64>) -> Result<Option<Matrix3<f64>>> {
        let cols: Vec<Result<Option<Vector3<f64>>>> = (0..3)
            .into_par_iter()
            .map(|k| {
                let mut a = *areas;
                a[k] += delta[k];
                Ok(self.shoot(s0, target, centres, &a, repeats)?.map(|s| (base.residual - s.residual) / delta[k]))
            })
            .collect();
        let mut jac = Matrix3::zeros();
        for (k, c) in cols.into_iter().enumerate() {
            match c? {
                Some(c) => jac.set_column(k, &c),
                None => return Ok(None),
            }
        }
        Ok(Some(jac))
    }

    fn leg(&self, s0: &ThreeSphereState, target: &ThreeSphereState) -> Result<Leg> {
        let centres = self.choose(self.candidates(s0)?)?;
        let caps2 = Vector3::from_fn(|k, _| centres[k].cap.powi(2));
        let model = Matrix3::from_columns(&[centres[0].bracket, centres[1].bracket, centres[2].bracket]);
        let r0 = pose_residual(s0, target);
        // loop counts put the side near the cap; sides may grow to twice the cap
        let counts = |a: &Vector3<f64>, old: [usize; 3]| -> [usize; 3] {
            std::array::from_fn(|k| old[k].max((1.25 * a[k].abs() / caps2[k]).ceil() as usize).max(1))
        };
        let limit = |k: usize, n: &[usize; 3]| 4.0 * caps2[k] * n[k] as f64;
        let guess = model.lu().solve(&r0).unwrap_or_else(Vector3::zeros);
        let mut repeats = counts(&guess, [1; 3]);
        let mut areas = Vector3::zeros();
        let mut best = self
            .shoot(s0, target, &centres, &areas, &repeats)?
            .ok_or_else(|| Error::Degenerate("loop transits leave the admissible set".into()))?;
        let mut simulations = 1;
        let fallback = |g: f64, k: usize| if g.abs() > 1e-3 * caps2[k] { g } else { caps2[k] };
        let secant = |areas: &Vector3<f64>, repeats: &[usize; 3], best: &Shot, d: Vector3<f64>, sims: &mut usize| -> Result<Option<Matrix3<f64>>> {
            *sims += 3;
            self.secant(s0, target, &centres, best, areas, repeats, &Vector3::from_fn(|k, _| fallback(d[k], k)))
        };
        let mut jac = secant(&areas, &repeats, &best, guess, &mut simulations)?.unwrap_or(model);
        // second guess from the simulated response
        if let Some(g) = jac.lu().solve(&best.residual) {
            let n = counts(&g, repeats);
            if n != repeats {
                repeats = n;
                jac = secant(&areas, &repeats, &best, g, &mut simulations)?.unwrap_or(jac);
            }
        }
        let mut err = best.residual.norm();
        let mut history = vec![err];
        let mut lambda = 1e-2 * jac.norm();
        let mut iterations = 0;
        while err > self.opts.tol && iterations < self.opts.budget {
            iterations += 1;
            let jt = jac.transpose();
            let lhs = jt * jac + Matrix3::identity() * lambda * lambda;
            let step = lhs.lu().solve(&(jt * best.residual)).ok_or_else(|| Error::Degenerate("singular damped system".into()))?;
            let mut trial = areas + step;
            if (0..3).any(|k| trial[k].abs() > limit(k, &repeats)) {
                // more loops are needed; switch counts only if that does not lose ground
                let n = counts(&trial, repeats);
                simulations += 1;
                if let Some(shot) = self.shoot(s0, target, &centres, &areas, &n)? {
                    if shot.residual.norm() <= err {
                        repeats = n;
                        best = shot;
                        err = best.residual.norm();
                        jac = secant(&areas, &repeats, &best, step, &mut simulations)?.unwrap_or(jac);
                        continue;
                    }
                }
                for k in 0..3 {
                    trial[k] = trial[k].clamp(-limit(k, &repeats), limit(k, &repeats));
                }
            }
            let step = trial - areas;
            let shot = self.shoot(s0, target, &centres, &trial, &repeats)?;
            simulations += 1;
            let Some(shot) = shot else {
                lambda *= 10.0;
                continue;
            };
            let dr = best.residual - shot.residual;
            if step.norm_squared() > 0.0 {
                jac += (dr - jac * step) * step.transpose() / step.norm_squared();
            }
            if shot.residual.norm() < err {
                areas = trial;
                best = shot;
                err = best.residual.norm();
                history.push(err);
                lambda /= 10.0;
            } else {
                lambda *= 10.0;
                // the secant model failed; rebuild it around the current areas
                jac = secant(&areas, &repeats, &best, 0.5 * step, &mut simulations)?.unwrap_or(jac);
            }
        }
        Ok(Leg { stroke: best.stroke, primitives: best.prims, final_state: best.fin, iterations, simulations, history })
    }
}

/// Steers the swimmer from `state0` to `target` by iterative shooting.
///
/// Fails when the start state is not locally controllable (bracket rank below
/// five) or inadmissible. When the budget runs out the best plan found is
/// returned with `converged = false`.
pub fn plan_local(state0: &ThreeSphereState, target: &ThreeSphereState, params: &SwimmerParams, opts: &PlannerOptions) -> Result<Plan> {
    state0.validate(params)?;
    target.validate(params)?;
    let fields = FieldOptions::with_wall(opts.wall);
    let empty = |err: f64| -> Result<Plan> {
        Ok(Plan {
            start: *state0,
            target: *target,
            primitives: vec![],
            stroke: Stroke::new(vec![0.0], vec![state0.shape().to_vec()])?,
            predicted_final: *state0,
            error: err,
            converged: err <= opts.tol,
            iterations: 0,
            simulations: 0,
            legs: 0,
            error_history: vec![err],
            dt: opts.dt,
            wall: opts.wall,
        })
    };
    let e0 = pose_residual(state0, target).norm();
    if state0.shape() == target.shape() && e0 == 0.0 {
        return empty(0.0);
    }
    let rank = liealg::three_sphere_rank(state0, params, &fields, &opts.rank)?;
    if rank.dimension < 5 {
        let detail = if state0.theta.cos().abs() < 1e-6 {
            "the swimmer axis is perpendicular to the wall, so x and theta cannot change".to_string()
        } else {
            format!("smallest singular ratio {:.3e}", rank.sigma_min_ratio())
        };
        return Err(Error::NotLocallyControllable { rank: rank.dimension, detail });
    }
    let planner = Planner { params, opts, fields };
    let legs = ((e0 / opts.trust_radius).ceil() as usize).max(1);
    let mut current = *state0;
    let mut stroke = Stroke::new(vec![0.0], vec![state0.shape().to_vec()])?;
    let mut primitives = Vec::new();
    let mut history = vec![e0];
    let mut iterations = 0;
    let mut simulations = 1;
    for l in 1..=legs {
        let u = l as f64 / legs as f64;
        let lerp = |a: f64, b: f64| a + u * (b - a);
        let dtheta = sim::wrap_angle(target.theta - state0.theta);
        let waypoint = if l == legs {
            *target
        } else {
            ThreeSphereState::new(
                lerp(state0.xi1, target.xi1),
                lerp(state0.xi2, target.xi2),
                lerp(state0.x, target.x),
                lerp(state0.y, target.y),
                state0.theta + u * dtheta,
            )
        };
        let leg = planner.leg(&current, &waypoint)?;
        iterations += leg.iterations;
        simulations += leg.simulations;
        history.extend(leg.history.iter().skip(1));
        let shift = stroke.times[stroke.times.len() - 1];
        stroke.append(&leg.stroke)?;
        primitives.extend(leg.primitives.into_iter().map(|p| match p {
            Primitive::ShapeMove { from, to, t0, t1 } => Primitive::ShapeMove { from, to, t0: t0 + shift, t1: t1 + shift },
            Primitive::BracketLoop { centre, pair, amplitude, repeats, t0, t1 } => {
                Primitive::BracketLoop { centre, pair, amplitude, repeats, t0: t0 + shift, t1: t1 + shift }
            }
        }));
        // an unconverged leg is carried on from where it ended
        current = leg.final_state;
    }
    let predicted = planner.run(state0, &stroke)?;
    let error = pose_residual(&predicted, target).norm();
    Ok(Plan {
        start: *state0,
        target: *target,
        primitives,
        stroke,
        predicted_final: predicted,
        error,
        converged: error <= opts.tol,
        iterations,
        simulations,
        legs,
        error_history: history,
        dt: opts.dt,
        wall: opts.wall,
    })
}

/// Re-integrates a plan's stroke from its start state.
pub fn replay(plan: &Plan, params: &SwimmerParams) -> Result<ThreeSphereState> {
    let opts = SimOptions { dt: plan.dt, fields: FieldOptions::with_wall(plan.wall), record: false };
    Ok(sim::integrate(&plan.start, &plan.stroke, params, &opts)?.last().clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> SwimmerParams {
        SwimmerParams::new(0.1, 1.0).unwrap()
    }

    #[test]
    fn zero_amplitude_loop_is_identity() {
        let s = ThreeSphereState::new(1.0, 1.4, 0.0, 2.0, 0.7);
        let l = bracket_loop(&s, (0, 1), 0.0, &params()).unwrap();
        assert_eq!(l.times.len(), 1);
        let tr = sim::integrate(&s, &l, &params(), &SimOptions::new(0.01, true)).unwrap();
        assert_eq!(tr.last(), &s);
    }

    #[test]
    fn loop_is_closed() {
        let s = ThreeSphereState::new(1.0, 1.4, 0.0, 2.0, 0.7);
        for amp in [0.1, -0.1] {
            let l = bracket_loop(&s, (0, 1), amp, &params()).unwrap();
            assert_eq!(l.first(), l.last());
            assert_eq!(l.times.len(), 8);
            assert!((l.duration() - 0.5).abs() < 1e-15);
        }
        assert!(bracket_loop(&s, (0, 0), 0.1, &params()).is_err());
    }

    #[test]
    fn loop_orientation_flips_displacement() {
        let s = ThreeSphereState::new(1.0, 1.4, 0.0, 2.0, 0.7);
        let p = params();
        let o = SimOptions::new(0.005, true);
        let a = sim::net_displacement(&sim::integrate(&s, &bracket_loop(&s, (0, 1), 0.05, &p).unwrap(), &p, &o).unwrap());
        let b = sim::net_displacement(&sim::integrate(&s, &bracket_loop(&s, (0, 1), -0.05, &p).unwrap(), &p, &o).unwrap());
        assert!((a.clone() + b.clone()).norm() < 0.1 * a.norm(), "{a} {b}");
        let c = sim::net_displacement(&sim::integrate(&s, &bracket_loop(&s, (1, 0), 0.05, &p).unwrap(), &p, &o).unwrap());
        assert!((a + c).norm() < 0.1 * b.norm());
    }

    #[test]
    fn loop_matches_bracket() {
        let p = params();
        let s = ThreeSphereState::new(1.0, 1.4, 0.0, 2.0, 0.7);
        let h = liealg::three_sphere_handles(p, FieldOptions::wall());
        let x = DVector::from_column_slice(s.to_vector().as_slice());
        let b = liealg::lie_bracket(&h[0], &h[1], &x, 1e-4).unwrap();
        for eps in [0.04, -0.04] {
            let l = bracket_loop(&s, (0, 1), eps, &p).unwrap();
            let d = sim::net_displacement(&sim::integrate(&s, &l, &p, &SimOptions::new(1e-3, true)).unwrap());
            let pred = Vector3::new(b[2], b[3], b[4]) * eps * eps.abs();
            assert!((Vector3::new(d[0], d[1], d[2]) - pred).norm() < 1e-2 * pred.norm(), "{d} {pred}");
        }
    }

    #[test]
    fn plan_json_lists_primitives() {
        let p = params();
        let s = ThreeSphereState::new(1.0, 1.4, 0.0, 2.0, 0.7);
        let t = ThreeSphereState { x: s.x + 1e-3, ..s };
        let plan = plan_local(&s, &t, &p, &PlannerOptions::default()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&plan.to_json()).unwrap();
        let prims = v["primitives"].as_array().unwrap();
        assert!(prims.iter().any(|p| p["kind"] == "bracket_loop" && p["amplitude"].is_f64()));
        assert!(v["stroke"]["times"].is_array());
    }

    #[test]
    fn target_equal_start_gives_empty_plan() {
        let s = ThreeSphereState::new(1.0, 1.4, 0.0, 2.0, 0.7);
        let p = plan_local(&s, &s, &params(), &PlannerOptions::default()).unwrap();
        assert!(p.primitives.is_empty());
        assert_eq!(p.error, 0.0);
        assert!(p.converged);
    }

    #[test]
    fn small_rotation_is_reached() {
        let p = params();
        let s = ThreeSphereState::new(1.0, 1.4, 0.0, 2.0, std::f64::consts::FRAC_PI_4);
        let t = ThreeSphereState { theta: s.theta + 1e-3, ..s };
        let plan = plan_local(&s, &t, &p, &PlannerOptions::default()).unwrap();
        assert!(plan.converged);
        assert!(plan.iterations <= 50);
        assert_eq!(plan.predicted_final.shape(), t.shape());
        let again = replay(&plan, &p).unwrap();
        assert!(pose_residual(&again, &plan.predicted_final).norm() < 1e-12);
    }

    #[test]
    fn sideways_target_needs_many_loops() {
        let p = params();
        let s = ThreeSphereState { xi1: 1.007006045189787, xi2: 0.9276945440138081, x: 0.0, y: 2.2008834153739842, theta: 0.8326500510393067 };
        let d = [0.0053581236328820005, -0.0001025200012603958, -0.0023434969773289856];
        let t = ThreeSphereState::new(s.xi1, s.xi2, s.x + d[0], s.y + d[1], s.theta + d[2]);
        let plan = plan_local(&s, &t, &p, &PlannerOptions::default()).unwrap();
        assert!(plan.converged, "{:?}", plan.error_history);
        assert!(plan.iterations <= 50);
        assert!(plan.error_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn perpendicular_start_is_rejected() {
        let s = ThreeSphereState::new(1.0, 1.4, 0.0, 3.0, std::f64::consts::FRAC_PI_2);
        let t = ThreeSphereState { x: 1e-3, ..s };
        let r = plan_local(&s, &t, &params(), &PlannerOptions::default());
        assert!(matches!(r, Err(Error::NotLocallyControllable { .. })), "{r:?}");
    }
}
