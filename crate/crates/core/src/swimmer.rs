//! Swimmer geometries, the point-force resistance assembly and the control
//! vector fields obtained from the self-propulsion constraint.
//!
//! Sphere forces are `f_i = 6 pi mu a (A u)_i` with `A = I - 6 pi mu a M`, where
//! `M` holds Blake (or free-space) tensors between distinct spheres and image
//! self-terms on the diagonal. Pose rates come from zero total force and
//! torque: `S A (T p_dot + U xi_dot) = 0`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix3, Matrix3x2, UnitQuaternion, Vector3, Vector5};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::greens::{self, FluidParams, Vec3};

pub type TangentVector = DVector<f64>;

const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwimmerParams {
    pub a: f64,
    #[serde(default)]
    pub fluid: FluidParams,
}

impl SwimmerParams {
    pub fn new(a: f64, mu: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Argument(format!("sphere radius must be positive, got {a}")));
        }
        Ok(Self { a, fluid: FluidParams::new(mu)? })
    }

    /// Safety margin used by all strict admissibility inequalities.
    pub fn margin(&self) -> f64 {
        1e-9 * self.a
    }
}

/// Which terms of the resistance problem enter the field evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    /// Solve the leading-order point-force system exactly.
    #[default]
    Full,
    /// Keep only the terms linear in the sphere radius.
    FirstOrder,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldOptions {
    pub wall: bool,
    pub order: Order,
    /// Adds the rotational drag `8 pi mu a^3 omega` of each sphere to the torque balance.
    pub rotlet: bool,
}

impl FieldOptions {
    pub fn wall() -> Self {
        Self { wall: true, order: Order::Full, rotlet: false }
    }

    pub fn free() -> Self {
        Self { wall: false, ..Self::wall() }
    }

    pub fn with_wall(wall: bool) -> Self {
        Self { wall, ..Self::wall() }
    }
}

fn cross_matrix(v: &Vec3) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

// ---------------------------------------------------------------- three-sphere

/// Planar three-sphere swimmer: arm lengths, centre sphere position and axis angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThreeSphereState {
    pub xi1: f64,
    pub xi2: f64,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl ThreeSphereState {
    pub fn new(xi1: f64, xi2: f64, x: f64, y: f64, theta: f64) -> Self {
        Self { xi1, xi2, x, y, theta }
    }

    /// `(xi1, xi2, x, y, theta)`
    pub fn to_vector(&self) -> Vector5<f64> {
        Vector5::new(self.xi1, self.xi2, self.x, self.y, self.theta)
    }

    pub fn from_slice(v: &[f64]) -> Self {
        Self::new(v[0], v[1], v[2], v[3], v[4])
    }

    pub fn shape(&self) -> [f64; 2] {
        [self.xi1, self.xi2]
    }

    pub fn pose(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.theta)
    }

    pub fn with_shape(&self, xi: [f64; 2]) -> Self {
        Self { xi1: xi[0], xi2: xi[1], ..*self }
    }

    pub fn with_pose(&self, p: &Vector3<f64>) -> Self {
        Self { x: p[0], y: p[1], theta: p[2], ..*self }
    }

    pub fn axis(&self) -> Vec3 {
        Vec3::new(self.theta.cos(), self.theta.sin(), 0.0)
    }

    pub fn normal(&self) -> Vec3 {
        Vec3::new(-self.theta.sin(), self.theta.cos(), 0.0)
    }

    pub fn centre(&self) -> Vec3 {
        Vec3::new(self.x, self.y, 0.0)
    }

    /// Violations of the admissible set; empty when the state is admissible.
    pub fn violations(&self, params: &SwimmerParams) -> Vec<String> {
        let mut out = Vec::new();
        let vals = [self.xi1, self.xi2, self.x, self.y, self.theta];
        if vals.iter().any(|v| !v.is_finite()) {
            out.push("non-finite state component".to_string());
            return out;
        }
        let a = params.a;
        let m = params.margin();
        for (k, xi) in [self.xi1, self.xi2].iter().enumerate() {
            if !(*xi > 2.0 * a + m) {
                out.push(format!("arm xi{} = {xi} must exceed 2a = {}", k + 1, 2.0 * a));
            }
        }
        if !(self.y > 0.0) {
            out.push(format!("centre height y = {} must be positive", self.y));
        }
        for (k, p) in three_sphere_positions(self).iter().enumerate() {
            if !(p.y > a + m) {
                out.push(format!("sphere {} wall clearance {} must exceed a = {a}", k + 1, p.y));
            }
        }
        out
    }

    pub fn validate(&self, params: &SwimmerParams) -> Result<()> {
        let v = self.violations(params);
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Inadmissible(v))
        }
    }
}

/// Sphere centres `c - xi1 e`, `c`, `c + xi2 e`.
pub fn three_sphere_positions(s: &ThreeSphereState) -> [Vec3; 3] {
    let c = s.centre();
    let e = s.axis();
    [c - s.xi1 * e, c, c + s.xi2 * e]
}

/// Kinematic matrices `T` (9x3, pose `(x, y, theta)`) and `U` (9x2).
pub fn three_sphere_kinematics(s: &ThreeSphereState) -> (DMatrix<f64>, DMatrix<f64>) {
    let e = s.axis();
    let n = s.normal();
    let mut t = DMatrix::zeros(9, 3);
    let mut u = DMatrix::zeros(9, 2);
    for i in 0..3 {
        t[(3 * i, 0)] = 1.0;
        t[(3 * i + 1, 1)] = 1.0;
    }
    for k in 0..3 {
        t[(k, 2)] = -s.xi1 * n[k];
        t[(6 + k, 2)] = s.xi2 * n[k];
        u[(k, 0)] = -e[k];
        u[(6 + k, 1)] = e[k];
    }
    (t, u)
}

// ----------------------------------------------------------------- four-sphere

/// Arm directions of the regular tetrahedron in the body frame.
pub fn tetrahedron() -> [Vec3; 4] {
    let s = 1.0 / 3f64.sqrt();
    [
        Vec3::new(s, s, s),
        Vec3::new(s, -s, -s),
        Vec3::new(-s, s, -s),
        Vec3::new(-s, -s, s),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourSphereState {
    pub xi: [f64; 4],
    pub c: Vec3,
    pub orient: UnitQuaternion<f64>,
}

impl FourSphereState {
    pub fn new(xi: [f64; 4], c: Vec3, orient: UnitQuaternion<f64>) -> Self {
        Self { xi, c, orient }
    }

    pub fn arm(&self, i: usize) -> Vec3 {
        self.orient * tetrahedron()[i]
    }

    pub fn violations(&self, params: &SwimmerParams) -> Vec<String> {
        let mut out = Vec::new();
        let a = params.a;
        let m = params.margin();
        let q = self.orient.quaternion();
        if self.xi.iter().chain(self.c.iter()).chain(q.coords.iter()).any(|v| !v.is_finite()) {
            out.push("non-finite state component".to_string());
            return out;
        }
        if (q.norm() - 1.0).abs() > 1e-10 {
            out.push(format!("orientation quaternion norm {} is not 1", q.norm()));
        }
        let lo = (1.5f64).sqrt() * a;
        for (k, xi) in self.xi.iter().enumerate() {
            if !(*xi > lo + m) {
                out.push(format!("arm xi{} = {xi} must exceed sqrt(3/2) a = {lo}", k + 1));
            }
        }
        if !(self.c.y > 0.0) {
            out.push(format!("centre height {} must be positive", self.c.y));
        }
        let pos = four_sphere_positions(self);
        for (k, p) in pos.iter().enumerate() {
            if !(p.y > a + m) {
                out.push(format!("sphere {} wall clearance {} must exceed a = {a}", k + 1, p.y));
            }
        }
        for i in 0..4 {
            for j in i + 1..4 {
                let d = (pos[i] - pos[j]).norm();
                if !(d > 2.0 * a + m) {
                    out.push(format!("spheres {} and {} overlap (distance {d})", i + 1, j + 1));
                }
            }
        }
        out
    }

    pub fn validate(&self, params: &SwimmerParams) -> Result<()> {
        let v = self.violations(params);
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Inadmissible(v))
        }
    }

    /// Renormalises the orientation quaternion.
    pub fn renormalized(mut self) -> Self {
        self.orient = UnitQuaternion::new_normalize(self.orient.into_inner());
        self
    }
}

/// Sphere centres `c + xi_i R t_i`.
pub fn four_sphere_positions(s: &FourSphereState) -> [Vec3; 4] {
    let t = tetrahedron();
    std::array::from_fn(|i| s.c + s.xi[i] * (s.orient * t[i]))
}

/// Kinematic matrices `T` (12x6, pose rate `(c_dot, omega_body)`) and `U` (12x4).
pub fn four_sphere_kinematics(s: &FourSphereState) -> (DMatrix<f64>, DMatrix<f64>) {
    let r = s.orient.to_rotation_matrix().into_inner();
    let mut t = DMatrix::zeros(12, 6);
    let mut u = DMatrix::zeros(12, 4);
    for i in 0..4 {
        let arm = s.arm(i);
        t.fixed_view_mut::<3, 3>(3 * i, 0).copy_from(&Matrix3::identity());
        t.fixed_view_mut::<3, 3>(3 * i, 3).copy_from(&(-s.xi[i] * cross_matrix(&arm) * r));
        u.fixed_view_mut::<3, 1>(3 * i, i).copy_from(&arm);
    }
    (t, u)
}

// ------------------------------------------------------------------- assembly

#[derive(Debug, Clone, PartialEq)]
pub struct ResistanceAssembly {
    /// Grand resistance matrix `A` (3N x 3N), normalised by `6 pi mu a`.
    pub a: DMatrix<f64>,
    /// Force and torque balance rows (6 x 3N).
    pub s: DMatrix<f64>,
    /// Pose kinematics (3N x dim p).
    pub t: DMatrix<f64>,
    /// Shape kinematics (3N x dim xi).
    pub u: DMatrix<f64>,
    pub positions: Vec<Vec3>,
}

/// Interaction matrix `M`: image self-terms (wall mode only) on the diagonal,
/// Blake or free-space tensors between distinct spheres.
pub fn interaction_matrix(positions: &[Vec3], params: &SwimmerParams, wall: bool) -> Result<DMatrix<f64>> {
    let n = positions.len();
    let fluid = &params.fluid;
    let mut m = DMatrix::zeros(3 * n, 3 * n);
    for i in 0..n {
        if wall {
            m.fixed_view_mut::<3, 3>(3 * i, 3 * i).copy_from(&greens::self_image(&positions[i], fluid)?);
        }
        for j in i + 1..n {
            let d = (positions[i] - positions[j]).norm();
            if d < 2.0 * params.a {
                return Err(Error::Configuration(format!(
                    "spheres {} and {} overlap: distance {d} < 2a = {}",
                    i + 1,
                    j + 1,
                    2.0 * params.a
                )));
            }
            // K_ij(r, r0) = K_ji(r0, r) lets one evaluation fill both blocks
            let k = if wall {
                greens::blake_tensor(&positions[i], &positions[j], fluid)?
            } else {
                greens::stokeslet(&(positions[i] - positions[j]), fluid)?
            };
            m.fixed_view_mut::<3, 3>(3 * i, 3 * j).copy_from(&k);
            m.fixed_view_mut::<3, 3>(3 * j, 3 * i).copy_from(&k.transpose());
        }
    }
    Ok(m)
}

/// `A = I - 6 pi mu a M`.
pub fn assemble(positions: &[Vec3], params: &SwimmerParams, wall: bool) -> Result<DMatrix<f64>> {
    let m = interaction_matrix(positions, params, wall)?;
    let n = m.nrows();
    Ok(DMatrix::identity(n, n) - (6.0 * PI * params.fluid.mu * params.a) * m)
}

/// Total force rows and total torque rows about `reference`.
pub fn balance_matrix(positions: &[Vec3], reference: &Vec3) -> DMatrix<f64> {
    let n = positions.len();
    let mut s = DMatrix::zeros(6, 3 * n);
    for (i, p) in positions.iter().enumerate() {
        s.fixed_view_mut::<3, 3>(0, 3 * i).copy_from(&Matrix3::identity());
        s.fixed_view_mut::<3, 3>(3, 3 * i).copy_from(&cross_matrix(&(p - reference)));
    }
    s
}

pub fn three_sphere_assembly(s: &ThreeSphereState, params: &SwimmerParams, wall: bool) -> Result<ResistanceAssembly> {
    let positions = three_sphere_positions(s).to_vec();
    let a = assemble(&positions, params, wall)?;
    let (t, u) = three_sphere_kinematics(s);
    Ok(ResistanceAssembly { a, s: balance_matrix(&positions, &s.centre()), t, u, positions })
}

pub fn four_sphere_assembly(s: &FourSphereState, params: &SwimmerParams, wall: bool) -> Result<ResistanceAssembly> {
    let positions = four_sphere_positions(s).to_vec();
    let a = assemble(&positions, params, wall)?;
    let (t, u) = four_sphere_kinematics(s);
    Ok(ResistanceAssembly { a, s: balance_matrix(&positions, &s.c), t, u, positions })
}

/// Sphere forces `f_i = 6 pi mu a (A u)_i` for given sphere velocities.
pub fn sphere_forces(asm: &ResistanceAssembly, velocities: &DVector<f64>, params: &SwimmerParams) -> Vec<Vec3> {
    let f = (6.0 * PI * params.fluid.mu * params.a) * (&asm.a * velocities);
    (0..asm.positions.len()).map(|i| Vec3::new(f[3 * i], f[3 * i + 1], f[3 * i + 2])).collect()
}

/// Solves the selected balance rows for the pose rate of each shape column.
///
/// `rot` maps the pose rate to the world angular velocity (3 x dim p) and is
/// only used when the rotlet term is enabled.
fn solve_pose_rates(
    asm: &ResistanceAssembly,
    rows: &[usize],
    checked: &[usize],
    rot: &DMatrix<f64>,
    params: &SwimmerParams,
    opts: &FieldOptions,
) -> Result<DMatrix<f64>> {
    let np = asm.t.ncols();
    let nxi = asm.u.ncols();
    let nsph = asm.positions.len() as f64;
    let sel = |m: &DMatrix<f64>| DMatrix::from_fn(rows.len(), m.ncols(), |i, j| m[(rows[i], j)]);
    let lu_of = |b: DMatrix<f64>| {
        let lu = b.clone().lu();
        if lu.determinant().abs() <= 1e-14 * b.norm().powi(rows.len() as i32) {
            return Err(Error::Degenerate("singular balance matrix".into()));
        }
        Ok(lu)
    };
    match opts.order {
        Order::Full => {
            let sa = &asm.s * &asm.a;
            let mut sat = &sa * &asm.t;
            let sau = &sa * &asm.u;
            if opts.rotlet {
                // 8 pi mu a^3 omega per sphere, normalised by 6 pi mu a
                let k = nsph * 4.0 / 3.0 * params.a * params.a;
                let mut tr = sat.view_mut((3, 0), (3, np));
                tr += k * rot;
            }
            let lu = lu_of(sel(&sat))?;
            let p = -lu.solve(&sel(&sau)).ok_or_else(|| Error::Degenerate("singular balance matrix".into()))?;
            let res = &sat * &p + &sau;
            for col in 0..nxi {
                let scale = (&sau.column(col)).norm().max((&sat * p.column(col)).norm()).max(1.0);
                for &r in rows.iter().chain(checked) {
                    if res[(r, col)].abs() > RESIDUAL_TOL * scale {
                        return Err(Error::Consistency(format!(
                            "balance row {r} residual {} exceeds tolerance",
                            res[(r, col)]
                        )));
                    }
                }
            }
            Ok(p)
        }
        Order::FirstOrder => {
            let a1 = (&asm.a - DMatrix::identity(asm.a.nrows(), asm.a.ncols())) / params.a;
            let st = &asm.s * &asm.t;
            let su = &asm.s * &asm.u;
            let lu = lu_of(sel(&st))?;
            let p0 = -lu.solve(&sel(&su)).ok_or_else(|| Error::Degenerate("singular balance matrix".into()))?;
            let rhs = &asm.s * (&a1 * (&asm.t * &p0 + &asm.u));
            let p1 = -lu.solve(&sel(&rhs)).ok_or_else(|| Error::Degenerate("singular balance matrix".into()))?;
            Ok(p0 + params.a * p1)
        }
    }
}

/// Rows of the in-plane problem: force x, force y, torque z.
const PLANAR_ROWS: [usize; 3] = [0, 1, 5];
const PLANAR_CHECKED: [usize; 3] = [2, 3, 4];

/// Pose rates `(x_dot, y_dot, theta_dot)` per unit rate of `xi1` (column 0) and `xi2` (column 1).
pub fn three_sphere_pose_rates(s: &ThreeSphereState, params: &SwimmerParams, opts: &FieldOptions) -> Result<Matrix3x2<f64>> {
    let asm = three_sphere_assembly(s, params, opts.wall)?;
    let mut rot = DMatrix::zeros(3, 3);
    rot[(2, 2)] = 1.0;
    let p = solve_pose_rates(&asm, &PLANAR_ROWS, &PLANAR_CHECKED, &rot, params, opts)?;
    Ok(Matrix3x2::from_fn(|i, j| p[(i, j)]))
}

/// The two control fields on `(xi1, xi2, x, y, theta)` with default options.
pub fn three_sphere_fields(s: &ThreeSphereState, params: &SwimmerParams, wall: bool) -> Result<(TangentVector, TangentVector)> {
    three_sphere_fields_with(s, params, &FieldOptions::with_wall(wall))
}

pub fn three_sphere_fields_with(
    s: &ThreeSphereState,
    params: &SwimmerParams,
    opts: &FieldOptions,
) -> Result<(TangentVector, TangentVector)> {
    let w = three_sphere_pose_rates(s, params, opts)?;
    let f = |k: usize| {
        let mut v = DVector::zeros(5);
        v[k] = 1.0;
        v.rows_mut(2, 3).copy_from(&w.column(k));
        v
    };
    Ok((f(0), f(1)))
}

/// Pose rates `(c_dot, omega_body)` (6 x 4) per unit arm rate, torque taken about `reference`.
pub fn four_sphere_pose_rates_about(
    s: &FourSphereState,
    params: &SwimmerParams,
    opts: &FieldOptions,
    reference: &Vec3,
) -> Result<DMatrix<f64>> {
    let positions = four_sphere_positions(s).to_vec();
    let a = assemble(&positions, params, opts.wall)?;
    let (t, u) = four_sphere_kinematics(s);
    let asm = ResistanceAssembly { a, s: balance_matrix(&positions, reference), t, u, positions };
    let mut rot = DMatrix::zeros(3, 6);
    rot.fixed_view_mut::<3, 3>(0, 3).copy_from(s.orient.to_rotation_matrix().matrix());
    solve_pose_rates(&asm, &[0, 1, 2, 3, 4, 5], &[], &rot, params, opts)
}

pub fn four_sphere_pose_rates(s: &FourSphereState, params: &SwimmerParams, opts: &FieldOptions) -> Result<DMatrix<f64>> {
    four_sphere_pose_rates_about(s, params, opts, &s.c)
}

/// The four control fields on `(xi_1..xi_4, c, omega_body)` with default options.
pub fn four_sphere_fields(s: &FourSphereState, params: &SwimmerParams, wall: bool) -> Result<[TangentVector; 4]> {
    four_sphere_fields_with(s, params, &FieldOptions::with_wall(wall))
}

pub fn four_sphere_fields_with(s: &FourSphereState, params: &SwimmerParams, opts: &FieldOptions) -> Result<[TangentVector; 4]> {
    let w = four_sphere_pose_rates(s, params, opts)?;
    Ok(std::array::from_fn(|k| {
        let mut v = DVector::zeros(10);
        v[k] = 1.0;
        v.rows_mut(4, 6).copy_from(&w.column(k));
        v
    }))
}

/// Local exponential chart `R = R0 exp(rho)` of the four-sphere configuration
/// space, so that fields can be differentiated in plain coordinates
/// `(xi_1..xi_4, c, rho)`.
#[derive(Debug, Clone, Copy)]
pub struct FourSphereChart {
    pub base: UnitQuaternion<f64>,
}

impl FourSphereChart {
    pub fn at(s: &FourSphereState) -> Self {
        Self { base: s.orient }
    }

    pub fn coords(&self, s: &FourSphereState) -> DVector<f64> {
        let rho = (self.base.inverse() * s.orient).scaled_axis();
        let mut v = DVector::zeros(10);
        v.rows_mut(0, 4).copy_from_slice(&s.xi);
        v.rows_mut(4, 3).copy_from(&s.c);
        v.rows_mut(7, 3).copy_from(&rho);
        v
    }

    pub fn state(&self, v: &DVector<f64>) -> FourSphereState {
        let rho = Vector3::new(v[7], v[8], v[9]);
        FourSphereState {
            xi: [v[0], v[1], v[2], v[3]],
            c: Vec3::new(v[4], v[5], v[6]),
            orient: self.base * UnitQuaternion::from_scaled_axis(rho),
        }
    }

    /// Field `k` expressed in chart coordinates.
    pub fn field(&self, k: usize, v: &DVector<f64>, params: &SwimmerParams, opts: &FieldOptions) -> Result<DVector<f64>> {
        let s = self.state(v);
        let w = four_sphere_pose_rates(&s, params, opts)?;
        let rho = Vector3::new(v[7], v[8], v[9]);
        let omega = Vector3::new(w[(3, k)], w[(4, k)], w[(5, k)]);
        let mut out = DVector::zeros(10);
        out[k] = 1.0;
        for i in 0..3 {
            out[4 + i] = w[(i, k)];
        }
        out.rows_mut(7, 3).copy_from(&(right_jacobian_inverse(&rho) * omega));
        Ok(out)
    }
}

/// Inverse right Jacobian of SO(3): `rho_dot = J_r^{-1}(rho) omega_body`.
pub fn right_jacobian_inverse(rho: &Vector3<f64>) -> Matrix3<f64> {
    let th = rho.norm();
    let k = cross_matrix(rho);
    let c = if th < 1e-4 {
        1.0 / 12.0 + th * th / 720.0
    } else {
        1.0 / (th * th) - (1.0 + th.cos()) / (2.0 * th * th.sin())
    };
    Matrix3::identity() + 0.5 * k + c * k * k
}

/// Mirror `x -> -x` with the outer spheres relabelled: arms swap, `theta -> 2 pi - theta`.
/// The fields satisfy `F1(s) = S F2(S s)` with `S = s_matrix()`.
pub fn s_image(s: &ThreeSphereState) -> ThreeSphereState {
    ThreeSphereState::new(s.xi2, s.xi1, -s.x, s.y, 2.0 * PI - s.theta)
}

pub fn s_matrix() -> nalgebra::Matrix5<f64> {
    let mut m = nalgebra::Matrix5::zeros();
    m[(0, 1)] = 1.0;
    m[(1, 0)] = 1.0;
    m[(2, 2)] = -1.0;
    m[(3, 3)] = 1.0;
    m[(4, 4)] = -1.0;
    m
}

/// Mirror `x -> -x` keeping labels: `theta -> pi - theta`. Each field satisfies
/// `F_i(T s) = T F_i(s)` with `T = t_matrix()`.
pub fn t_image(s: &ThreeSphereState) -> ThreeSphereState {
    ThreeSphereState::new(s.xi1, s.xi2, -s.x, s.y, PI - s.theta)
}

pub fn t_matrix() -> nalgebra::Matrix5<f64> {
    nalgebra::Matrix5::from_diagonal(&Vector5::new(1.0, 1.0, -1.0, 1.0, -1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(a: f64) -> SwimmerParams {
        SwimmerParams::new(a, 1.0).unwrap()
    }

    #[test]
    fn positions_horizontal_and_vertical() {
        let p = three_sphere_positions(&ThreeSphereState::new(1.0, 1.0, 0.0, 5.0, 0.0));
        assert_eq!(p[0], Vec3::new(-1.0, 5.0, 0.0));
        assert_eq!(p[1], Vec3::new(0.0, 5.0, 0.0));
        assert_eq!(p[2], Vec3::new(1.0, 5.0, 0.0));
        let s = ThreeSphereState::new(1.0, 2.0, 0.3, 5.0, std::f64::consts::FRAC_PI_2);
        let p = three_sphere_positions(&s);
        assert_relative_eq!(p[0], Vec3::new(0.3, 4.0, 0.0), epsilon = 1e-15);
        assert_relative_eq!(p[2], Vec3::new(0.3, 7.0, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn kinematics_match_position_differences() {
        let s = ThreeSphereState::new(1.1, 0.7, 0.2, 3.0, 0.9);
        let (t, u) = three_sphere_kinematics(&s);
        let h = 1e-6;
        let flat = |s: &ThreeSphereState| {
            let p = three_sphere_positions(s);
            DVector::from_iterator(9, p.iter().flat_map(|v| v.iter().copied()))
        };
        let v = s.to_vector();
        // pose columns: x, y, theta are state indices 2, 3, 4; shape columns 0, 1
        for (col, idx, m) in [(0, 2, &t), (1, 3, &t), (2, 4, &t), (0, 0, &u), (1, 1, &u)] {
            let mut vp = v;
            let mut vm = v;
            vp[idx] += h;
            vm[idx] -= h;
            let d = (flat(&ThreeSphereState::from_slice(vp.as_slice())) - flat(&ThreeSphereState::from_slice(vm.as_slice()))) / (2.0 * h);
            assert_relative_eq!(d, m.column(col).into_owned(), epsilon = 1e-9);
        }
    }

    #[test]
    fn four_sphere_kinematics_match_differences() {
        let s = FourSphereState::new(
            [1.0, 1.2, 0.9, 1.1],
            Vec3::new(0.1, 4.0, -0.2),
            UnitQuaternion::from_euler_angles(0.3, -0.2, 0.5),
        );
        let (t, u) = four_sphere_kinematics(&s);
        let flat = |s: &FourSphereState| {
            let p = four_sphere_positions(s);
            DVector::from_iterator(12, p.iter().flat_map(|v| v.iter().copied()))
        };
        let h = 1e-6;
        for k in 0..3 {
            let mut e = Vec3::zeros();
            e[k] = h;
            let mut sp = s;
            let mut sm = s;
            sp.c += e;
            sm.c -= e;
            assert_relative_eq!((flat(&sp) - flat(&sm)) / (2.0 * h), t.column(k).into_owned(), epsilon = 1e-9);
            let mut sp = s;
            let mut sm = s;
            sp.orient = s.orient * UnitQuaternion::from_scaled_axis(e);
            sm.orient = s.orient * UnitQuaternion::from_scaled_axis(-e);
            assert_relative_eq!((flat(&sp) - flat(&sm)) / (2.0 * h), t.column(3 + k).into_owned(), epsilon = 1e-8);
        }
        for k in 0..4 {
            let mut sp = s;
            let mut sm = s;
            sp.xi[k] += h;
            sm.xi[k] -= h;
            assert_relative_eq!((flat(&sp) - flat(&sm)) / (2.0 * h), u.column(k).into_owned(), epsilon = 1e-9);
        }
    }

    #[test]
    fn tetrahedron_identities() {
        let t = tetrahedron();
        assert!(t.iter().fold(Vec3::zeros(), |a, b| a + b).norm() < 1e-15);
        for i in 0..4 {
            assert_relative_eq!(t[i].norm(), 1.0, epsilon = 1e-15);
            for j in i + 1..4 {
                assert_relative_eq!(t[i].dot(&t[j]), -1.0 / 3.0, epsilon = 1e-15);
            }
        }
        let s = FourSphereState::new([1.0; 4], Vec3::new(0.0, 10.0, 0.0), UnitQuaternion::identity());
        for (p, d) in four_sphere_positions(&s).iter().zip(t.iter()) {
            assert_relative_eq!(*p, s.c + d, epsilon = 1e-15);
        }
    }

    #[test]
    fn single_sphere_lorentz_block() {
        let a = 0.01;
        let y = 1.0;
        let m = assemble(&[Vec3::new(0.0, y, 0.0)], &params(a), true).unwrap();
        let r = a / y;
        assert_relative_eq!(m[(0, 0)], 1.0 + 9.0 / 16.0 * r, max_relative = 1e-14);
        assert_relative_eq!(m[(1, 1)], 1.0 + 9.0 / 8.0 * r, max_relative = 1e-14);
        assert_relative_eq!(m[(2, 2)], 1.0 + 9.0 / 16.0 * r, max_relative = 1e-14);
    }

    #[test]
    fn free_space_diagonal_is_identity() {
        let pos = [Vec3::new(0.0, 1.0, 0.0), Vec3::new(1.0, 1.5, 0.2), Vec3::new(-1.0, 2.0, 0.3)];
        let a = assemble(&pos, &params(0.1), false).unwrap();
        for i in 0..3 {
            assert_eq!(a.fixed_view::<3, 3>(3 * i, 3 * i).into_owned(), Matrix3::identity());
        }
    }

    #[test]
    fn overlap_is_rejected() {
        let pos = [Vec3::new(0.0, 1.0, 0.0), Vec3::new(0.15, 1.0, 0.0)];
        assert!(matches!(assemble(&pos, &params(0.1), true), Err(Error::Configuration(_))));
    }

    #[test]
    fn vanishing_radius_limit() {
        let th = 0.7;
        let s = ThreeSphereState::new(1.0, 1.4, 0.0, 3.0, th);
        let (f1, _) = three_sphere_fields(&s, &params(1e-8), true).unwrap();
        let want = [1.0, 0.0, th.cos() / 3.0, th.sin() / 3.0, 0.0];
        for k in 0..5 {
            assert!((f1[k] - want[k]).abs() < 1e-7, "{k}: {} vs {}", f1[k], want[k]);
        }
    }

    #[test]
    fn perpendicular_axis_freezes_x_and_theta() {
        let s = ThreeSphereState::new(1.0, 1.4, 0.0, 5.0, std::f64::consts::FRAC_PI_2);
        let (f1, f2) = three_sphere_fields(&s, &params(0.05), true).unwrap();
        for f in [f1, f2] {
            assert!(f[2].abs() < 1e-14 && f[4].abs() < 1e-14, "{f}");
        }
    }

    #[test]
    fn free_space_axial_motion() {
        let s = ThreeSphereState::new(1.0, 1.4, 0.0, 5.0, 0.6);
        let (f1, f2) = three_sphere_fields(&s, &params(0.05), false).unwrap();
        for f in [f1, f2] {
            assert!(f[4].abs() < 1e-15);
            assert_relative_eq!(f[3] / f[2], 0.6f64.tan(), max_relative = 1e-12);
        }
    }

    #[test]
    fn self_propulsion_residuals_vanish() {
        let p = params(0.05);
        let s = ThreeSphereState::new(0.9, 1.3, 0.4, 1.7, 0.8);
        let asm = three_sphere_assembly(&s, &p, true).unwrap();
        let w = three_sphere_pose_rates(&s, &p, &FieldOptions::wall()).unwrap();
        for k in 0..2 {
            let mut xd = DVector::zeros(2);
            xd[k] = 1.0;
            let pd = DVector::from_column_slice(w.column(k).as_slice());
            let vel = &asm.t * pd + &asm.u * xd;
            let f = sphere_forces(&asm, &vel, &p);
            let scale = f.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let total: Vec3 = f.iter().sum();
            let torque: Vec3 = f.iter().zip(&asm.positions).map(|(f, x)| (x - s.centre()).cross(f)).sum();
            assert!(total.norm() < 1e-10 * scale);
            assert!(torque.norm() < 1e-10 * scale);
        }
    }

    #[test]
    fn first_order_matches_full_to_second_order() {
        let s = ThreeSphereState::new(1.0, 1.4, 0.0, 2.0, 0.7);
        let opts = FieldOptions { order: Order::FirstOrder, ..FieldOptions::wall() };
        let mut errs = vec![];
        for a in [0.004, 0.002] {
            let p = params(a);
            let full = three_sphere_pose_rates(&s, &p, &FieldOptions::wall()).unwrap();
            let lin = three_sphere_pose_rates(&s, &p, &opts).unwrap();
            errs.push((full - lin).norm());
        }
        let ratio = errs[0] / errs[1];
        assert!((ratio - 4.0).abs() < 0.3, "{ratio}");
    }

    #[test]
    fn rotlet_changes_rotation_only_slightly() {
        let s = ThreeSphereState::new(1.0, 1.4, 0.0, 2.0, 0.7);
        let p = params(0.05);
        let base = three_sphere_pose_rates(&s, &p, &FieldOptions::wall()).unwrap();
        let rot = three_sphere_pose_rates(&s, &p, &FieldOptions { rotlet: true, ..FieldOptions::wall() }).unwrap();
        let d = (base - rot).norm();
        assert!(d > 0.0 && d < 1e-3, "{d}");
    }

    #[test]
    fn reflections() {
        let p = params(0.05);
        let s = ThreeSphereState::new(1.0, 1.3, 0.2, 3.0, 0.7);
        let (f1, f2) = three_sphere_fields(&s, &p, true).unwrap();
        let (g1, g2) = three_sphere_fields(&s_image(&s), &p, true).unwrap();
        let (h1, h2) = three_sphere_fields(&t_image(&s), &p, true).unwrap();
        let sm = DMatrix::from_column_slice(5, 5, s_matrix().as_slice());
        let tm = DMatrix::from_column_slice(5, 5, t_matrix().as_slice());
        assert!((&f1 - &sm * &g2).norm() < 1e-12 * f1.norm());
        assert!((&f2 - &sm * &g1).norm() < 1e-12 * f2.norm());
        assert!((&h1 - &tm * &f1).norm() < 1e-12 * f1.norm());
        assert!((&h2 - &tm * &f2).norm() < 1e-12 * f2.norm());
    }

    #[test]
    fn violations_reported() {
        let p = params(0.1);
        assert!(ThreeSphereState::new(0.3, 0.3, 0.0, 5.0, 0.0).violations(&p).is_empty());
        assert!(!ThreeSphereState::new(0.2, 0.3, 0.0, 5.0, 0.0).violations(&p).is_empty());
        let v = ThreeSphereState::new(1.0, 1.0, 0.0, 1.05, std::f64::consts::FRAC_PI_2).violations(&p);
        assert!(v.iter().any(|m| m.contains("clearance")));
    }

    #[test]
    fn chart_roundtrip_and_field() {
        let s = FourSphereState::new([1.0, 1.1, 0.9, 1.2], Vec3::new(0.0, 5.0, 0.0), UnitQuaternion::from_euler_angles(0.2, 0.1, -0.3));
        let chart = FourSphereChart::at(&s);
        let mut v = chart.coords(&s);
        assert!(v.rows(7, 3).norm() < 1e-15);
        v[7] = 0.3;
        v[9] = -0.2;
        let back = chart.coords(&chart.state(&v));
        assert_relative_eq!(back, v, epsilon = 1e-13);
        // chart rate of the orientation reproduces omega_body through exp
        let p = params(0.05);
        let opts = FieldOptions::wall();
        let f = chart.field(0, &v, &p, &opts).unwrap();
        let w = four_sphere_pose_rates(&chart.state(&v), &p, &opts).unwrap();
        let h = 1e-6;
        let vp = &v + h * &f;
        let vm = &v - h * &f;
        let rp = chart.state(&vp).orient;
        let rm = chart.state(&vm).orient;
        let omega = (rm.inverse() * rp).scaled_axis() / (2.0 * h);
        for i in 0..3 {
            assert!((omega[i] - w[(3 + i, 0)]).abs() < 1e-7);
        }
    }
}
