//! Residual of the far-field series as the height and radius change.

use std::f64::consts::FRAC_PI_4;

use wallstokes::series;
use wallstokes::swimmer::{self, FieldOptions, Order, SwimmerParams, ThreeSphereState};

fn residual(a: f64, y: f64, order: Order) -> wallstokes::Result<f64> {
    let p = SwimmerParams::new(a, 1.0)?;
    let s = ThreeSphereState::new(1.0, 1.4, 0.0, y, FRAC_PI_4);
    let (f1, f2) = swimmer::three_sphere_fields_with(&s, &p, &FieldOptions { order, ..FieldOptions::wall() })?;
    let [g1, g2] = series::series_fields(s.xi1, s.xi2, y, s.theta, a)?;
    let (g1, g2) = (g1.value(), g2.value());
    Ok((2..5).map(|i| (f1[i] - g1[i]).powi(2) + (f2[i] - g2[i]).powi(2)).sum::<f64>().sqrt())
}

fn main() -> wallstokes::Result<()> {
    println!("first order in a, a = 1e-3");
    for y in [10.0, 20.0, 40.0, 80.0] {
        println!("  y {y:>4}  residual {:.4e}", residual(1e-3, y, Order::FirstOrder)?);
    }
    println!("full order, y = 40");
    for a in [4e-3, 2e-3, 1e-3, 5e-4] {
        println!("  a {a:<6}  residual {:.4e}", residual(a, 40.0, Order::Full)?);
    }
    Ok(())
}
