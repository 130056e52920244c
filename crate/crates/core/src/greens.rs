//! Free-space Stokeslet and the Blake image system for a no-slip wall at `y = 0`.
//!
//! `K(r, r0) = G(r - r0) + K1 + K2 + K3`, where the images live at the mirror
//! point `(x0, -y0, z0)`: a reflected Stokeslet, a potential doublet and a
//! Stokeslet doublet.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Tensor3 = Matrix3<f64>;

/// Evaluation closer than this to a source is an error.
pub const SINGULARITY_RADIUS: f64 = 1e-12;

/// Index of the wall-normal coordinate.
pub const NORMAL: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluidParams {
    pub mu: f64,
}

impl Default for FluidParams {
    fn default() -> Self {
        Self { mu: 1.0 }
    }
}

impl FluidParams {
    pub fn new(mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::Argument(format!("viscosity must be positive, got {mu}")));
        }
        Ok(Self { mu })
    }
}

fn oseen(r: &Vec3, d: f64) -> Tensor3 {
    let d3 = d * d * d;
    Tensor3::identity() / d + r * r.transpose() / d3
}

/// Free-space Stokeslet `G(r) = (I/|r| + r r^T/|r|^3) / (8 pi mu)`.
pub fn stokeslet(r: &Vec3, fluid: &FluidParams) -> Result<Tensor3> {
    let d = r.norm();
    if !(d > SINGULARITY_RADIUS) {
        return Err(Error::Singularity { radius: SINGULARITY_RADIUS });
    }
    Ok(oseen(r, d) / (8.0 * PI * fluid.mu))
}

/// Mirror image of a source point through the wall.
pub fn mirror(r0: &Vec3) -> Vec3 {
    Vec3::new(r0.x, -r0.y, r0.z)
}

/// The three image terms `[K1, K2, K3]` for a source at `r0`, evaluated at `r`.
///
/// Requires `r0.y > 0`; `r` may be any point distinct from the mirror point.
pub fn image_terms(r: &Vec3, r0: &Vec3, fluid: &FluidParams) -> Result<[Tensor3; 3]> {
    let y0 = r0[NORMAL];
    if !(y0 > 0.0) {
        return Err(Error::Domain(format!("source height must be positive, got {y0}")));
    }
    let rp = r - mirror(r0);
    let d = rp.norm();
    if !(d > SINGULARITY_RADIUS) {
        return Err(Error::Singularity { radius: SINGULARITY_RADIUS });
    }
    Ok(images_unchecked(&rp, d, y0, fluid.mu))
}

fn images_unchecked(rp: &Vec3, d: f64, y0: f64, mu: f64) -> [Tensor3; 3] {
    let k1 = -oseen(rp, d) / (8.0 * PI * mu);
    let d3 = d * d * d;
    let d5 = d3 * d * d;
    let c = 1.0 / (4.0 * PI * mu);
    let rn = rp[NORMAL];
    let mut k2 = Tensor3::zeros();
    let mut k3 = Tensor3::zeros();
    for i in 0..3 {
        let di2 = if i == NORMAL { 1.0 } else { 0.0 };
        for j in 0..3 {
            let dij = if i == j { 1.0 } else { 0.0 };
            let dj2 = if j == NORMAL { 1.0 } else { 0.0 };
            let sgn = 1.0 - 2.0 * dj2;
            k2[(i, j)] = c * y0 * y0 * sgn * (dij / d3 - 3.0 * rp[i] * rp[j] / d5);
            k3[(i, j)] = -c * y0 * sgn * (rn * dij - rp[j] * di2 + rp[i] * dj2) / d3
                + c * y0 * sgn * 3.0 * rp[i] * rp[j] * rn / d5;
        }
    }
    [k1, k2, k3]
}

/// Blake tensor `K(r, r0)`: velocity at `r` due to a unit point force at `r0`.
pub fn blake_tensor(r: &Vec3, r0: &Vec3, fluid: &FluidParams) -> Result<Tensor3> {
    if r[NORMAL] < 0.0 {
        return Err(Error::Domain(format!("evaluation point below the wall (y = {})", r[NORMAL])));
    }
    let g = stokeslet(&(r - r0), fluid)?;
    let [k1, k2, k3] = image_terms(r, r0, fluid)?;
    Ok(g + k1 + k2 + k3)
}

/// Image part of the Blake tensor evaluated at the source itself.
pub fn self_image(r0: &Vec3, fluid: &FluidParams) -> Result<Tensor3> {
    let [k1, k2, k3] = image_terms(r0, r0, fluid)?;
    Ok(k1 + k2 + k3)
}

/// Superposed wall-bounded velocity of a set of point forces `(position, force)`.
pub fn point_force_velocity(sources: &[(Vec3, Vec3)], eval: &Vec3, fluid: &FluidParams) -> Result<Vec3> {
    sources.iter().try_fold(Vec3::zeros(), |acc, (s, f)| Ok(acc + blake_tensor(eval, s, fluid)? * f))
}
