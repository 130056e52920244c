use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use nalgebra::Vector3;
use wallstokes::series;
use wallstokes::swimmer::{self, FieldOptions, Order, SwimmerParams, ThreeSphereState};

const A: f64 = 1e-3;

fn first_order(s: &ThreeSphereState, wall: bool) -> [Vector3<f64>; 2] {
    let p = SwimmerParams::new(A, 1.0).unwrap();
    let opts = FieldOptions { order: Order::FirstOrder, ..FieldOptions::with_wall(wall) };
    let (f1, f2) = swimmer::three_sphere_fields_with(s, &p, &opts).unwrap();
    [Vector3::new(f1[2], f1[3], f1[4]), Vector3::new(f2[2], f2[3], f2[4])]
}

fn states() -> Vec<ThreeSphereState> {
    let mut v = Vec::new();
    for (x1, x2) in [(1.0, 1.4), (0.8, 0.8), (1.3, 0.9)] {
        for t in [0.0, 0.4, FRAC_PI_4, 1.2, FRAC_PI_2, 2.5, 4.0] {
            v.push(ThreeSphereState::new(x1, x2, 0.0, 20.0, t));
        }
    }
    v
}

#[test]
fn free_space_terms_match_the_numeric_fields() {
    for s in states() {
        let num = first_order(&s, false);
        let ser = series::series_fields(s.xi1, s.xi2, s.y, s.theta, A).unwrap();
        for k in 0..2 {
            let free = ser[k].terms[0] + ser[k].terms[1];
            assert!((free - num[k]).norm() <= 1e-12 * num[k].norm(), "{s:?} field {k}: {free} vs {}", num[k]);
        }
    }
}

#[test]
fn wall_terms_match_the_numeric_correction() {
    for y in [20.0, 40.0] {
        for s in states() {
            let s = ThreeSphereState { y, ..s };
            let wall = first_order(&s, true);
            let free = first_order(&s, false);
            let ser = series::series_fields(s.xi1, s.xi2, s.y, s.theta, A).unwrap();
            for k in 0..2 {
                let corr: Vector3<f64> = ser[k].terms[2..].iter().sum();
                let num = wall[k] - free[k];
                // the truncation leaves a 1/y^5 remainder against a 1/y^3 correction
                assert!((corr - num).norm() <= 20.0 / (y * y) * num.norm(), "{s:?} field {k}: {corr} vs {num}");
            }
        }
    }
}

#[test]
fn series_respects_the_swap_reflection() {
    let (x1, x2, y, t) = (1.0, 1.4, 20.0, 0.7);
    let [f1, f2] = series::series_fields(x1, x2, y, t, A).unwrap();
    let [g1, g2] = series::series_fields(x2, x1, y, 2.0 * std::f64::consts::PI - t, A).unwrap();
    let flip = |v: Vector3<f64>| Vector3::new(-v[0], v[1], -v[2]);
    assert!((f1.pose() - flip(g2.pose())).norm() < 1e-15);
    assert!((f2.pose() - flip(g1.pose())).norm() < 1e-15);
}

#[test]
fn first_bracket_is_odd_under_the_swap_reflection() {
    let (x1, x2, y, t) = (1.0, 1.4, 30.0, 0.7);
    let b = series::series_brackets(x1, x2, y, t, A).unwrap();
    let c = series::series_brackets(x2, x1, y, 2.0 * std::f64::consts::PI - t, A).unwrap();
    let flip = |v: Vector3<f64>| Vector3::new(-v[0], v[1], -v[2]);
    assert!((b.f1f2 + flip(c.f1f2)).norm() <= 1e-14 * b.f1f2.norm());
}

#[test]
fn library_convention_negates_the_first_bracket() {
    let b = series::series_brackets(1.0, 1.4, 30.0, 0.7, A).unwrap();
    let l = b.to_library_convention();
    assert_eq!(l.f1f2, -b.f1f2);
    assert_eq!(l.f1_f1f2, b.f1_f1f2);
}

#[test]
fn perpendicular_axis_kills_the_determinant() {
    let d = series::series_determinant(1.0, 1.4, 30.0, FRAC_PI_2, A).unwrap();
    assert!(d.leading.abs() < 1e-20);
    let b = series::series_brackets(1.0, 1.4, 30.0, FRAC_PI_2, A).unwrap();
    assert!(series::minor_determinant(&b).abs() < 1e-30);
}

#[test]
fn parallel_axis_reports_the_subdeterminant() {
    let d = series::series_determinant(1.0, 1.4, 30.0, 0.0, A).unwrap();
    assert!(d.delta.is_some());
    let b = series::series_brackets(1.0, 1.4, 30.0, 0.0, A).unwrap();
    assert!(series::subdeterminant(&b).abs() > 0.0);
}

#[test]
fn nonpositive_inputs_are_rejected() {
    assert!(series::series_fields(1.0, 1.4, 0.0, 0.5, A).is_err());
    assert!(series::series_brackets(-1.0, 1.4, 10.0, 0.5, A).is_err());
}
