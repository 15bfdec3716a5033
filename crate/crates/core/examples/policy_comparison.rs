// Follower strategies compared on common random numbers.

use gwh::control::{follower_threshold, FollowerCostSpec, FollowerThreshold, Problem, Strategy, ZeroControl};
use gwh::levy::{Discount, LevyModel};
use gwh::mc::SimConfig;
use gwh::oracle::policy_comparison;

pub fn run_example() -> Vec<f64> {
    let bm = LevyModel::standard_brownian();
    let r = Discount::new(0.5).unwrap();
    let spec = FollowerCostSpec::quadratic(1.0, 0.5).unwrap();
    let x_star = follower_threshold(&spec, &bm, r).unwrap();
    let best = FollowerThreshold { threshold: x_star };
    let high = FollowerThreshold { threshold: x_star + 0.5 };
    let low = FollowerThreshold { threshold: x_star - 0.5 };
    let strategies: [&dyn Strategy; 4] = [&best, &high, &low, &ZeroControl];
    let table = policy_comparison(
        &Problem::Follower(spec),
        &bm,
        r,
        &strategies,
        0.0,
        &SimConfig::new(2_000, 1e-2, 4),
    )
    .unwrap();
    for row in &table.rows {
        println!(
            "{:<16} cost {:.4}  diff {:+.4} +- {:.4} (unpaired +- {:.4})",
            row.name, row.cost.mean, row.paired_diff.mean, row.paired_diff.stderr, row.unpaired_stderr
        );
    }
    table.rows.iter().map(|r| r.paired_diff.mean).collect()
}

#[allow(dead_code)]
fn main() {
    run_example();
}
