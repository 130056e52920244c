//! Three-sphere control fields near the wall against the far-field series.

use std::f64::consts::FRAC_PI_4;

use wallstokes::series;
use wallstokes::swimmer::{self, SwimmerParams, ThreeSphereState};

fn main() -> wallstokes::Result<()> {
    let a = 1e-3;
    let p = SwimmerParams::new(a, 1.0)?;
    println!("{:>5} {:>6} {:>14} {:>14} {:>14}", "y", "field", "x dot", "y dot", "theta dot");
    for y in [5.0, 10.0, 20.0, 40.0] {
        let s = ThreeSphereState::new(1.0, 1.4, 0.0, y, FRAC_PI_4);
        let (f1, f2) = swimmer::three_sphere_fields(&s, &p, true)?;
        let ser = series::series_fields(s.xi1, s.xi2, y, s.theta, a)?;
        for (k, f) in [f1, f2].iter().enumerate() {
            let g = ser[k].pose();
            println!("{y:>5} {:>6} {:>14.6e} {:>14.6e} {:>14.6e}", format!("F{}", k + 1), f[2], f[3], f[4]);
            println!("{:>5} {:>6} {:>14.6e} {:>14.6e} {:>14.6e}", "", "series", g[0], g[1], g[2]);
        }
    }
    Ok(())
}
