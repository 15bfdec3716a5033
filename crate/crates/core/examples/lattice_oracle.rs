// Dynamic programming on a lattice as an independent check of the index
// thresholds.

use gwh::control::{follower_threshold, FollowerCostSpec};
use gwh::func::RealFn;
use gwh::gittins::{locate_threshold, PayoffSpec};
use gwh::levy::{Discount, LevyModel};
use gwh::oracle::{dp_follower_oracle, dp_stopping_oracle, LatticeSpec};

pub fn run_example() -> (f64, f64) {
    let bm = LevyModel::standard_brownian();
    let r = Discount::new(0.5).unwrap();
    let payoff = PayoffSpec::increasing(RealFn::linear(0.5));
    let lattice = LatticeSpec::new(-6.0, 6.0, 201, 2e-3).unwrap();
    let dp = dp_stopping_oracle(&payoff, &bm, r, 0.0, &lattice).unwrap();
    let (index, _) = locate_threshold(&payoff, &bm, r, 0.0, 0.0).unwrap();
    println!(
        "stopping threshold: lattice {:?}, index {:?} (influence {:.1e})",
        dp.threshold, index, dp.boundary_influence
    );

    let spec = FollowerCostSpec::quadratic(0.5, 1.0).unwrap();
    let gap = LatticeSpec::new(-6.0, 4.0, 201, 2e-3).unwrap();
    let fo = dp_follower_oracle(&spec, &bm, r, &gap).unwrap();
    let x_star = follower_threshold(&spec, &bm, r).unwrap();
    println!("follower boundary: lattice {:.3}, index {x_star:.3}", fo.boundary);
    (dp.threshold.unwrap(), fo.boundary)
}

#[allow(dead_code)]
fn main() {
    run_example();
}
