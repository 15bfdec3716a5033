// Laws of the running supremum and infimum at an independent exponential
// time, checked against simulation.

use gwh::func::RealFn;
use gwh::levy::{Discount, JumpLaw, LevyModel};
use gwh::wiener_hopf::{
    expected_functional, infimum_law, scale_function, simulate_extrema, supremum_law, Side,
};

pub fn run_example() -> (f64, f64) {
    let r = Discount::new(0.5).unwrap();
    let bm = LevyModel::brownian(0.3, 1.0).unwrap();
    let sup = supremum_law(&bm, r).unwrap();
    let inf = infimum_law(&bm, r).unwrap();
    println!("sup rate {:?}, inf rate {:?}", sup.exponential_rate(), inf.exponential_rate());

    // E[e^{inf X}] in closed form and by simulation
    let exact = expected_functional(&inf, &RealFn::exp(), 0.0).unwrap().value;
    let samples = simulate_extrema(&bm, r, Side::Infimum, 20_000, 1e-2, 5).unwrap();
    let mc = samples.iter().map(|v| v.exp()).sum::<f64>() / samples.len() as f64;
    println!("E[exp(inf X)]: law {exact:.5}, simulated {mc:.5}");

    // spectrally negative jumps: the infimum comes from the scale function
    let sn = LevyModel::with_jumps(0.5, 0.7, 1.0, JumpLaw::ExponentialDown { b: 2.0 }).unwrap();
    let table = scale_function(&sn, r, 10.0, 401).unwrap();
    println!("W(1) = {:.6}, residual {:.2e}", table.w_values[40], table.residual);
    let inf_sn = infimum_law(&sn, r).unwrap();
    println!("P(inf X > -1) = {:.5}", 1.0 - inf_sn.cdf(-1.0));
    (exact, mc)
}

#[allow(dead_code)]
fn main() {
    run_example();
}
