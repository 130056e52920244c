use wallstokes::planner::{self, PlannerOptions, Primitive};
use wallstokes::sim::{self, SimOptions};
use wallstokes::swimmer::{SwimmerParams, ThreeSphereState};
use wallstokes::Error;

fn params() -> SwimmerParams {
    SwimmerParams::new(0.1, 1.0).unwrap()
}

fn start() -> ThreeSphereState {
    ThreeSphereState::new(1.0, 1.2, 0.0, 2.2, 0.8)
}

#[test]
fn moves_along_the_axis() {
    let s = start();
    let e = s.axis();
    let target = ThreeSphereState::new(s.xi1, s.xi2, s.x + 5e-3 * e.x, s.y + 5e-3 * e.y, s.theta);
    let plan = planner::plan_local(&s, &target, &params(), &PlannerOptions::default()).unwrap();
    assert!(plan.converged && plan.error <= 1e-4, "error {}", plan.error);
    let end = planner::replay(&plan, &params()).unwrap();
    assert!(planner::pose_residual(&end, &target).norm() <= 1e-4);
}

#[test]
fn plan_stays_admissible_and_replays_exactly() {
    let s = start();
    let target = ThreeSphereState::new(s.xi1, s.xi2, s.x - 2e-3, s.y + 1e-3, s.theta + 3e-3);
    let p = params();
    let plan = planner::plan_local(&s, &target, &p, &PlannerOptions::default()).unwrap();
    assert!(plan.converged);
    let t = sim::integrate(&s, &plan.stroke, &p, &SimOptions::new(plan.dt, plan.wall)).unwrap();
    assert!(t.states.iter().all(|x| x.violations(&p).is_empty()));
    assert_eq!(t.last().to_vector(), plan.predicted_final.to_vector());
    assert_eq!(plan.stroke.first(), s.shape());
    assert_eq!(plan.stroke.last(), target.shape());
}

#[test]
fn primitives_tile_the_stroke() {
    let s = start();
    let target = ThreeSphereState::new(s.xi1, s.xi2, s.x + 1e-3, s.y, s.theta - 2e-3);
    let plan = planner::plan_local(&s, &target, &params(), &PlannerOptions::default()).unwrap();
    let mut t = 0.0;
    let mut loops = 0;
    for p in &plan.primitives {
        let (t0, t1) = match p {
            Primitive::ShapeMove { t0, t1, .. } => (*t0, *t1),
            Primitive::BracketLoop { t0, t1, repeats, .. } => {
                loops += 1;
                assert!(*repeats >= 1);
                (*t0, *t1)
            }
        };
        assert!((t0 - t).abs() < 1e-9 && t1 >= t0);
        t = t1;
    }
    assert!(loops >= 1);
    assert!((t - plan.stroke.duration()).abs() < 1e-9);
    let json: serde_json::Value = serde_json::from_str(&plan.to_json()).unwrap();
    assert_eq!(json["primitives"].as_array().unwrap().len(), plan.primitives.len());
}

#[test]
fn larger_moves_are_split_into_legs() {
    let s = start();
    let target = ThreeSphereState::new(s.xi1, s.xi2, s.x + 1.5e-2, s.y, s.theta);
    let plan = planner::plan_local(&s, &target, &params(), &PlannerOptions::default()).unwrap();
    assert!(plan.legs >= 2);
    assert!(plan.converged, "error {}", plan.error);
}

#[test]
fn shape_change_in_target_is_honoured() {
    let s = start();
    let target = ThreeSphereState::new(1.1, 1.15, s.x, s.y, s.theta);
    let plan = planner::plan_local(&s, &target, &params(), &PlannerOptions::default()).unwrap();
    assert!(plan.converged);
    let end = planner::replay(&plan, &params()).unwrap();
    assert_eq!(end.shape(), target.shape());
}

#[test]
fn perpendicular_axis_is_not_controllable() {
    let s = ThreeSphereState::new(1.0, 1.2, 0.0, 2.0, std::f64::consts::FRAC_PI_2);
    let target = ThreeSphereState { x: 1e-3, ..s };
    match planner::plan_local(&s, &target, &params(), &PlannerOptions::default()) {
        Err(e @ Error::NotLocallyControllable { .. }) => assert_eq!(e.kind(), "not_locally_controllable"),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn inadmissible_start_is_rejected() {
    let s = ThreeSphereState::new(1.0, 1.2, 0.0, 0.3, 1.0);
    assert!(planner::plan_local(&s, &start(), &params(), &PlannerOptions::default()).is_err());
}
