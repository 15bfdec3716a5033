// Irreversible investment with a Cobb-Douglas payoff: the closed-form
// index against the generic one, and the payoff of the index strategy.

use std::sync::Arc;

use gwh::control::{cost_functional, CobbDouglasSpec, IndexControl, InvestIndex, Problem};
use gwh::levy::{Discount, LevyModel};
use gwh::mc::SimConfig;

pub fn run_example() -> f64 {
    let model = LevyModel::brownian(-0.2, 0.5).unwrap();
    let r = Discount::new(0.5).unwrap();
    let cd = CobbDouglasSpec::new(2.0, 0.5, 1.0).unwrap();
    let k = 1.0;
    let delta = cd.delta(&model, r, k).unwrap();
    let gamma = cd.gamma();
    let spec = cd.invest_spec(k).unwrap();
    let generic = InvestIndex::new(&spec, &model, r).unwrap();
    for x in [-1.0, 0.0, 1.0] {
        println!(
            "L({x:+}) = {:.6} (closed form {:.6})",
            generic.eval(x).unwrap(),
            delta * (gamma * x).exp()
        );
    }
    let strategy = IndexControl {
        name: "index".into(),
        index: Arc::new(move |x| delta * (gamma * x).exp()),
    };
    let payoff = cost_functional(
        &Problem::Invest(spec),
        &model,
        &strategy,
        r,
        0.0,
        &SimConfig::new(1_000, 1e-2, 2),
    )
    .unwrap();
    println!("expected payoff {:.4} +- {:.4}", payoff.mean, payoff.stderr);
    delta
}

#[allow(dead_code)]
fn main() {
    run_example();
}
