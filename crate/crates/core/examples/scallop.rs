//! A reciprocal stroke returns the swimmer; a loop does not.

use wallstokes::sim::{self, SimOptions, Stroke};
use wallstokes::swimmer::{SwimmerParams, ThreeSphereState};

fn main() -> wallstokes::Result<()> {
    let p = SwimmerParams::new(0.05, 1.0)?;
    let s = ThreeSphereState::new(1.0, 1.2, 0.0, 2.0, 0.6);
    let path = Stroke::through(&[vec![1.0, 1.2], vec![1.3, 1.1], vec![1.1, 1.5]])?;
    let there_and_back = path.out_and_back();
    let mut closed = path.clone();
    closed.append(&Stroke::through(&[vec![1.1, 1.5], vec![1.0, 1.2]])?)?;
    for (name, st) in [("reciprocal", there_and_back), ("loop", closed)] {
        let dt = st.duration() / 1e4;
        let d = sim::net_displacement(&sim::integrate(&s, &st, &p, &SimOptions::new(dt, true))?);
        println!("{name:>10}: dx {:+.3e} dy {:+.3e} dtheta {:+.3e}", d[0], d[1], d[2]);
    }
    Ok(())
}
