// Perpetual American put on a geometric Brownian motion.

use gwh::levy::{Discount, LevyModel};
use gwh::mc::SimConfig;
use gwh::stopping::perpetual_put;

pub fn run_example() -> f64 {
    let model = LevyModel::brownian(-0.5, 1.0).unwrap();
    let r = Discount::new(0.5).unwrap();
    let res = perpetual_put(&model, r, 1.0, 0.0, &SimConfig::new(20_000, 1e-2, 3)).unwrap();
    println!(
        "put price {:.4} +- {:.4}, exercise below {:.6}, horizon {:.1}",
        res.price.mean, res.price.stderr, res.threshold, res.horizon
    );
    res.price.mean
}

#[allow(dead_code)]
fn main() {
    run_example();
}
