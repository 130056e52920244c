//! Plan a small pose change and replay it.

use wallstokes::planner::{self, PlannerOptions};
use wallstokes::swimmer::{SwimmerParams, ThreeSphereState};

fn main() -> wallstokes::Result<()> {
    let p = SwimmerParams::new(0.1, 1.0)?;
    let start = ThreeSphereState::new(1.0, 1.2, 0.0, 2.2, 0.8);
    let target = ThreeSphereState::new(1.0, 1.2, 4e-3, 2.198, 0.805);
    let plan = planner::plan_local(&start, &target, &p, &PlannerOptions::default())?;
    println!("converged {} error {:.3e} iterations {} simulations {} legs {}", plan.converged, plan.error, plan.iterations, plan.simulations, plan.legs);
    println!("{} primitives, stroke duration {:.3}", plan.primitives.len(), plan.stroke.duration());
    let end = planner::replay(&plan, &p)?;
    println!("replayed pose error {:.3e}", planner::pose_residual(&end, &target).norm());
    if std::env::args().any(|a| a == "--json") {
        println!("{}", plan.to_json());
    }
    Ok(())
}
