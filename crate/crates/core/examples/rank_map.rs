//! Bracket-span dimension over orientation and height.

use std::f64::consts::PI;

use wallstokes::liealg::{self, GridSpec, RankOptions};
use wallstokes::swimmer::{FieldOptions, SwimmerParams};

fn main() -> wallstokes::Result<()> {
    let p = SwimmerParams::new(0.05, 1.0)?;
    let theta: Vec<f64> = (0..=8).map(|k| k as f64 * PI / 8.0).collect();
    let grid = GridSpec { xi1: vec![1.0], xi2: vec![1.4], y: vec![2.0, 4.0, 8.0], theta };
    for e in liealg::rank_map(&grid, &p, &FieldOptions::wall(), &RankOptions::default()) {
        println!("y {:>4} theta {:.4} dim {:>2} sigma_min {:.3e}", e.y, e.theta, e.dim, e.sigma_min_ratio);
    }
    Ok(())
}
