//! Net motion of small square loops against the Lie bracket.

use nalgebra::DVector;
use wallstokes::liealg;
use wallstokes::sim::{self, SimOptions, Stroke};
use wallstokes::swimmer::{FieldOptions, SwimmerParams, ThreeSphereState};

fn main() -> wallstokes::Result<()> {
    let p = SwimmerParams::new(0.05, 1.0)?;
    let s = ThreeSphereState::new(1.0, 1.4, 0.0, 2.0, 0.7);
    let h = liealg::three_sphere_handles(p, FieldOptions::wall());
    let b = liealg::lie_bracket(&h[0], &h[1], &DVector::from_column_slice(s.to_vector().as_slice()), 1e-4)?;
    println!("bracket      {:+.6e} {:+.6e} {:+.6e}", b[2], b[3], b[4]);
    for e in [0.1, 0.05, 0.025, 0.0125] {
        let st = Stroke::through(&[vec![1.0, 1.4], vec![1.0 + e, 1.4], vec![1.0 + e, 1.4 + e], vec![1.0, 1.4 + e], vec![1.0, 1.4]])?;
        let d = sim::net_displacement(&sim::integrate(&s, &st, &p, &SimOptions::new(e / 400.0, true))?) / (e * e);
        println!("eps {e:<8} {:+.6e} {:+.6e} {:+.6e}", d[0], d[1], d[2]);
    }
    Ok(())
}
