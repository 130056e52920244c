//! Four-sphere fields approach free space as the swimmer leaves the wall.

use nalgebra::UnitQuaternion;
use wallstokes::greens::Vec3;
use wallstokes::liealg::{self, RankOptions};
use wallstokes::swimmer::{self, FieldOptions, FourSphereState, SwimmerParams};

fn main() -> wallstokes::Result<()> {
    let p = SwimmerParams::new(0.05, 1.0)?;
    let q = UnitQuaternion::from_euler_angles(0.3, -0.2, 0.5);
    for y in [5.0, 10.0, 20.0, 40.0, 80.0, 160.0, 320.0] {
        let s = FourSphereState::new([1.0, 1.1, 0.9, 1.2], Vec3::new(0.0, y, 0.0), q);
        let w = swimmer::four_sphere_fields(&s, &p, true)?;
        let f = swimmer::four_sphere_fields(&s, &p, false)?;
        let num: f64 = w.iter().zip(&f).map(|(a, b)| (a - b).norm_squared()).sum();
        let den: f64 = f.iter().map(|b| b.norm_squared()).sum();
        println!("y {y:>5}  relative deviation {:.4e}", (num / den).sqrt());
    }
    let s = FourSphereState::new([1.0, 1.1, 0.9, 1.2], Vec3::new(0.0, 100.0, 0.0), q);
    let r = liealg::four_sphere_rank(&s, &p, &FieldOptions::wall(), &RankOptions { depth: 2, ..RankOptions::default() })?;
    println!("bracket span at y 100: {} of 10", r.dimension);
    Ok(())
}
