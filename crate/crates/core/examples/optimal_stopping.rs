// Value of the stopping problem by first passage at an exponential time,
// and by the index representation on the same paths.

use gwh::func::RealFn;
use gwh::gittins::PayoffSpec;
use gwh::levy::{Discount, LevyModel};
use gwh::mc::SimConfig;
use gwh::stopping::{stopping_value, stopping_value_repr};

pub fn run_example() -> (f64, f64) {
    let bm = LevyModel::standard_brownian();
    let r = Discount::new(0.5).unwrap();
    let payoff = PayoffSpec::increasing(RealFn::linear(0.5));
    let sim = SimConfig::new(20_000, 1e-2, 7);
    let direct = stopping_value(&payoff, &bm, r, 0.0, -1.0, &sim).unwrap();
    let repr = stopping_value_repr(&payoff, &bm, r, 0.0, -1.0, &sim).unwrap();
    println!(
        "v(-1, 0) = {:.4} +- {:.4} (threshold {:?}, {:?})",
        direct.value.mean, direct.value.stderr, direct.threshold, direct.region
    );
    println!("representation: {:.4} +- {:.4}", repr.mean, repr.stderr);
    (direct.value.mean, repr.mean)
}

#[allow(dead_code)]
fn main() {
    run_example();
}
