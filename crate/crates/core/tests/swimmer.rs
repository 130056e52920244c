use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, UnitQuaternion};
use proptest::prelude::*;
use wallstokes::greens::Vec3;
use wallstokes::swimmer::{self, FieldOptions, FourSphereState, Order, SwimmerParams, ThreeSphereState};

fn params() -> SwimmerParams {
    SwimmerParams::new(0.05, 1.0).unwrap()
}

fn state() -> impl Strategy<Value = ThreeSphereState> {
    (0.6..1.6f64, 0.6..1.6f64, -1.0..1.0f64, 1.7..6.0f64, 0.0..2.0 * PI)
        .prop_map(|(a, b, x, y, t)| ThreeSphereState::new(a, b, x, y, t))
        .prop_filter("admissible", |s| s.violations(&params()).is_empty())
}

fn rel(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).norm() / a.norm().max(b.norm())
}

fn dm(m: nalgebra::Matrix5<f64>) -> DMatrix<f64> {
    DMatrix::from_column_slice(5, 5, m.as_slice())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reflection_swaps_the_fields(s in state()) {
        let (f1, f2) = swimmer::three_sphere_fields(&s, &params(), true).unwrap();
        let (g1, g2) = swimmer::three_sphere_fields(&swimmer::s_image(&s), &params(), true).unwrap();
        let m = dm(swimmer::s_matrix());
        prop_assert!(rel(&f1, &(&m * &g2)) <= 1e-10);
        prop_assert!(rel(&f2, &(&m * &g1)) <= 1e-10);
    }

    #[test]
    fn mirror_in_the_normal_commutes(s in state()) {
        let (f1, f2) = swimmer::three_sphere_fields(&s, &params(), true).unwrap();
        let (g1, g2) = swimmer::three_sphere_fields(&swimmer::t_image(&s), &params(), true).unwrap();
        let m = dm(swimmer::t_matrix());
        prop_assert!(rel(&g1, &(&m * &f1)) <= 1e-10);
        prop_assert!(rel(&g2, &(&m * &f2)) <= 1e-10);
    }

    #[test]
    fn swimming_is_force_and_torque_free(s in state()) {
        let p = params();
        let asm = swimmer::three_sphere_assembly(&s, &p, true).unwrap();
        let rates = swimmer::three_sphere_pose_rates(&s, &p, &FieldOptions::wall()).unwrap();
        let c = s.centre();
        for k in 0..2 {
            let mut xi = DVector::zeros(2);
            xi[k] = 1.0;
            let pose = DVector::from_iterator(3, rates.column(k).iter().copied());
            let v = &asm.t * pose + &asm.u * xi;
            let f = swimmer::sphere_forces(&asm, &v, &p);
            let total: Vec3 = f.iter().sum();
            let torque: Vec3 = asm.positions.iter().zip(&f).map(|(x, f)| (x - c).cross(f)).sum();
            let scale: f64 = f.iter().map(|f| f.norm()).sum();
            prop_assert!(total.norm() <= 1e-12 * scale);
            prop_assert!(torque.norm() <= 1e-12 * scale * (s.xi1 + s.xi2));
        }
    }

    #[test]
    fn first_order_fields_differ_at_second_order(s in state()) {
        let dev = |a: f64| {
            let p = SwimmerParams::new(a, 1.0).unwrap();
            let full = swimmer::three_sphere_fields(&s, &p, true).unwrap();
            let first = swimmer::three_sphere_fields_with(&s, &p, &FieldOptions { order: Order::FirstOrder, ..FieldOptions::wall() }).unwrap();
            (&full.0 - &first.0).norm() + (&full.1 - &first.1).norm()
        };
        let q = dev(0.02) / dev(0.01);
        prop_assert!((3.0..5.0).contains(&q), "ratio {}", q);
    }

    #[test]
    fn free_space_fields_ignore_the_pose(s in state(), dx in -3.0..3.0f64, dy in 0.0..3.0f64) {
        let (f1, f2) = swimmer::three_sphere_fields(&s, &params(), false).unwrap();
        let moved = ThreeSphereState::new(s.xi1, s.xi2, s.x + dx, s.y + dy, s.theta);
        let (g1, g2) = swimmer::three_sphere_fields(&moved, &params(), false).unwrap();
        prop_assert!(rel(&f1, &g1) <= 1e-13 && rel(&f2, &g2) <= 1e-13);
    }
}

#[test]
fn shape_rows_are_unit() {
    let s = ThreeSphereState::new(1.0, 1.4, 0.0, 3.0, 0.6);
    let (f1, f2) = swimmer::three_sphere_fields(&s, &params(), true).unwrap();
    assert_eq!((f1[0], f1[1], f2[0], f2[1]), (1.0, 0.0, 0.0, 1.0));
}

#[test]
fn free_space_swimmer_moves_along_its_axis() {
    let s = ThreeSphereState::new(1.0, 1.4, 0.0, 3.0, 0.6);
    let (f1, f2) = swimmer::three_sphere_fields(&s, &params(), false).unwrap();
    let e = s.axis();
    for f in [f1, f2] {
        assert!((f[2] * e.y - f[3] * e.x).abs() < 1e-14);
        assert!(f[4].abs() < 1e-14);
    }
}

#[test]
fn overlapping_spheres_are_rejected() {
    let s = ThreeSphereState::new(0.05, 1.0, 0.0, 3.0, 0.6);
    assert!(swimmer::three_sphere_fields(&s, &params(), true).is_err());
    assert!(!s.violations(&params()).is_empty());
}

#[test]
fn sphere_below_the_wall_is_inadmissible() {
    let s = ThreeSphereState::new(1.0, 1.4, 0.0, 0.5, PI / 2.0);
    assert!(!s.violations(&params()).is_empty());
}

fn four_state(y: f64) -> FourSphereState {
    FourSphereState::new([1.0, 1.1, 0.9, 1.2], Vec3::new(0.3, y, -0.2), UnitQuaternion::from_euler_angles(0.3, -0.2, 0.5))
}

#[test]
fn four_sphere_fields_approach_free_space() {
    let p = params();
    let dev = |y: f64| {
        let w = swimmer::four_sphere_fields(&four_state(y), &p, true).unwrap();
        let f = swimmer::four_sphere_fields(&four_state(y), &p, false).unwrap();
        w.iter().zip(&f).map(|(a, b)| (a - b).norm()).sum::<f64>()
    };
    assert!(dev(1000.0) < 1e-5 && dev(100.0) > dev(1000.0) && dev(10.0) > dev(100.0));
}

#[test]
fn four_sphere_free_space_is_translation_invariant() {
    let p = params();
    let a = swimmer::four_sphere_fields(&four_state(3.0), &p, false).unwrap();
    let b = swimmer::four_sphere_fields(&four_state(30.0), &p, false).unwrap();
    for (u, v) in a.iter().zip(&b) {
        assert!(rel(u, v) < 1e-12);
    }
}

#[test]
fn four_sphere_swimming_is_force_and_torque_free() {
    let p = params();
    let s = four_state(4.0);
    let asm = swimmer::four_sphere_assembly(&s, &p, true).unwrap();
    let rates = swimmer::four_sphere_pose_rates(&s, &p, &FieldOptions::wall()).unwrap();
    for k in 0..4 {
        let mut xi = DVector::zeros(4);
        xi[k] = 1.0;
        let v = &asm.t * rates.column(k) + &asm.u * xi;
        let f = DVector::from_iterator(12, swimmer::sphere_forces(&asm, &v, &p).iter().flat_map(|f| [f.x, f.y, f.z]));
        let balance = &asm.s * &f;
        assert!(balance.norm() < 1e-12 * f.norm(), "column {k}: {balance}");
    }
}
