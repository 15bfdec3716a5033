// Laplace exponent, its right inverse and an Esscher tilt for a Brownian
// motion with two-sided exponential jumps.

use gwh::levy::{esscher_tilt, phi_right_inverse, Discount, JumpLaw, LevyModel};

pub fn run_example() -> f64 {
    let model = LevyModel::with_jumps(
        -0.2,
        0.8,
        1.5,
        JumpLaw::TwoSided {
            a: 4.0,
            b: 3.0,
            p: 0.4,
        },
    )
    .expect("valid model");
    let (lo, hi) = model.mgf_domain();
    println!("mgf domain ({lo}, {hi})");
    for c in [-1.0, 0.5, 1.0, 2.0] {
        println!("psi({c}) = {:.6}", model.laplace_exponent(c).unwrap());
    }
    let r = Discount::new(0.5).unwrap();
    let phi = phi_right_inverse(&model, r).unwrap();
    println!("Phi(0.5) = {phi:.10}, psi(Phi) = {:.3e}", model.laplace_exponent(phi).unwrap());

    let tilted = esscher_tilt(&model, 1.0).unwrap();
    println!("tilted drift {:.4}, jumps {:?}", tilted.drift, tilted.jumps);
    phi
}

#[allow(dead_code)]
fn main() {
    run_example();
}
