// Monotone follower with quadratic cost: threshold, cost of the reflection
// strategy and the first-order check along one path.

use gwh::control::{
    cost_functional, follower_control, follower_threshold, subgradient_path, verify_first_order,
    FollowerCostSpec, FollowerThreshold, InnerConfig, Problem, Tolerances,
};
use gwh::levy::{simulate_replication, Discount, LevyModel, Track};
use gwh::mc::SimConfig;

pub fn run_example() -> (f64, bool) {
    let bm = LevyModel::standard_brownian();
    let r = Discount::new(0.5).unwrap();
    let spec = FollowerCostSpec::quadratic(1.0, 0.5).unwrap();
    let x_star = follower_threshold(&spec, &bm, r).unwrap();
    println!("reflect X - theta below x* = {x_star:.6}");

    let sim = SimConfig::new(2_000, 1e-2, 1);
    let cost = cost_functional(
        &Problem::Follower(spec.clone()),
        &bm,
        &FollowerThreshold { threshold: x_star },
        r,
        0.0,
        &sim,
    )
    .unwrap();
    println!("cost from 0: {:.4} +- {:.4}", cost.mean, cost.stderr);

    let path = simulate_replication(&bm, 5.0, 1e-2, x_star, 11, 0, Track::Max).unwrap();
    let control = follower_control(&path, x_star);
    let inner = InnerConfig {
        reps: 100,
        ..InnerConfig::default()
    };
    let sg = subgradient_path(&spec, &bm, x_star, r, &path, &control, &inner).unwrap();
    let report = verify_first_order(&sg, &control, r, &Tolerances::default());
    println!(
        "positivity violations {:.3}, flat-off {:.4} +- {:.4}, pass = {}",
        report.positivity_violation_rate, report.flatoff.sum, report.flatoff.stderr, report.pass
    );
    (x_star, report.pass)
}

#[allow(dead_code)]
fn main() {
    run_example();
}
