//! Velocity on the wall from a point force, with and without the images.

use wallstokes::greens::{self, FluidParams, Vec3};

fn main() -> wallstokes::Result<()> {
    let fluid = FluidParams::default();
    let x0 = Vec3::new(0.0, 1.0, 0.0);
    let f = Vec3::new(1.0, 0.5, -0.3);
    println!("{:>6} {:>14} {:>14}", "x", "|G f|", "|K f|");
    for x in [-4.0, -1.0, 0.0, 0.5, 2.0, 8.0] {
        let w = Vec3::new(x, 0.0, 0.3);
        let g = greens::stokeslet(&(w - x0), &fluid)? * f;
        let k = greens::blake_tensor(&w, &x0, &fluid)? * f;
        println!("{x:>6} {:>14.6e} {:>14.6e}", g.norm(), k.norm());
    }
    Ok(())
}
