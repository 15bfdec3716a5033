// Two-factor investment reduced to one factor by an Esscher change of
// measure.

use gwh::control::esscher_reduce;
use gwh::levy::{Discount, LevyModel};

pub fn run_example() -> f64 {
    let x = LevyModel::standard_brownian();
    let y = LevyModel::standard_brownian();
    let r = Discount::new(1.0).unwrap();
    let red = esscher_reduce(&x, &y, r, 0.5).unwrap();
    println!(
        "Z: drift {}, sigma {:.6}; discount {}; beta {:.6}",
        red.z.drift, red.z.sigma, red.r_tilde, red.beta_coef
    );
    println!("theta at z = 0: {:.6}", red.index(0.0));
    red.beta_coef
}

#[allow(dead_code)]
fn main() {
    run_example();
}
