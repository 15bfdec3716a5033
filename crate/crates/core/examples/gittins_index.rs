// Index curve of a linear running payoff and the stopping threshold it
// gives for a few rewards.

use gwh::func::RealFn;
use gwh::gittins::{build_curve, gittins_threshold, kappa, PayoffSpec};
use gwh::levy::{Discount, LevyModel};

pub fn run_example() -> Vec<f64> {
    let bm = LevyModel::standard_brownian();
    let r = Discount::new(0.5).unwrap();
    let payoff = PayoffSpec::increasing(RealFn::linear(0.5));
    println!("kappa(0) = {}", kappa(&payoff, &bm, r, 0.0).unwrap().value);

    let curve = build_curve(&payoff, &bm, r, -4.0, 4.0, 161).unwrap();
    [-0.5, 0.0, 0.5]
        .iter()
        .map(|&c| {
            let x = gittins_threshold(&curve, c).finite().expect("threshold inside the grid");
            println!("c = {c:+.1}: stop above x* = {x:.6}");
            x
        })
        .collect()
}

#[allow(dead_code)]
fn main() {
    run_example();
}
