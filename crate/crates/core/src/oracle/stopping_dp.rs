//! Value iteration for `v(x, c)` on a lattice, independent of the index
//! machinery.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::func::RealFn;
use crate::gittins::PayoffSpec;
use crate::levy::{Discount, LevyModel};

use super::lattice::{apply, build_chain, Boundary, Chain, LatticeSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoppingOracle {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Smallest node in the stopping set `{v = c}`.
    pub threshold_node: Option<usize>,
    pub threshold: Option<f64>,
    pub iterations: usize,
    /// Largest change at the central half of the nodes when the lattice is
    /// widened by a quarter on each side.
    pub boundary_influence: f64,
}

const SUP_TOL: f64 = 1e-10;
const MAX_SWEEPS: usize = 50_000_000;

/// `G(x) = E_x[int_0^inf g(X_t) e^{-rt} dt]` for polynomial or exponential
/// `g`, from the moments of `X` at an exponential time.
pub(crate) fn discounted_mean(g: &RealFn, model: &LevyModel, r: f64) -> Option<Box<dyn Fn(f64) -> f64 + Send + Sync>> {
    let (mu, var) = model.unit_moments();
    match *g {
        RealFn::Affine { .. } | RealFn::Quadratic { .. } => {
            let [c0, c1, c2] = g.polynomial_coefficients()?;
            // X_T at T ~ Exp(r): E = mu/r, E[X^2] = var/r + 2 mu^2/r^2
            let m1 = mu / r;
            let m2 = var / r + 2.0 * mu * mu / (r * r);
            Some(Box::new(move |x: f64| {
                (c0 + c1 * (x + m1) + c2 * (x * x + 2.0 * x * m1 + m2)) / r
            }))
        }
        RealFn::Exp { scale, rate } => {
            let psi = model.laplace_exponent(rate).ok()?;
            if psi >= r {
                return None;
            }
            Some(Box::new(move |x: f64| scale * (rate * x).exp() / (r - psi)))
        }
        RealFn::Custom { .. } => None,
    }
}

fn solve(
    payoff: &PayoffSpec,
    model: &LevyModel,
    r: f64,
    c: f64,
    spec: &LatticeSpec,
    chain: &Chain,
) -> Result<(Vec<f64>, usize)> {
    let grid = spec.grid();
    let n = grid.len();
    let h = spec.spacing();
    let disc = (-r * spec.dt).exp();
    let running: Vec<f64> = grid.iter().map(|&x| payoff.g.eval(x) * (1.0 - disc) / r).collect();
    let asymptote = discounted_mean(&payoff.g, model, r);
    let ghost_value = |j: isize, v: &[f64]| -> f64 {
        let below = j < 0;
        let side = if below { spec.lower } else { spec.upper };
        let edge = if below { 0 } else { n - 1 };
        match (side, &asymptote) {
            (Boundary::Absorbing, Some(gf)) => c.min(gf(spec.x_lo + j as f64 * h)),
            _ => v[edge],
        }
    };
    let mut v: Vec<f64> = grid.iter().map(|&x| match &asymptote {
        Some(gf) => c.min(gf(x)),
        None => c,
    }).collect();
    let mut cont = vec![0.0; n];
    for sweep in 1..=MAX_SWEEPS {
        {
            let vref = &v;
            apply(chain, vref, &|j| ghost_value(j, vref), &mut cont);
        }
        let mut diff: f64 = 0.0;
        for i in 0..n {
            let new = c.min(running[i] + disc * cont[i]);
            diff = diff.max((new - v[i]).abs());
            v[i] = new;
        }
        if diff < SUP_TOL {
            return Ok((v, sweep));
        }
    }
    Err(Error::Convergence(format!(
        "value iteration did not reach {SUP_TOL} in {MAX_SWEEPS} sweeps"
    )))
}

/// Solves `v <- min(c, g (1 - e^{-r dt}) / r + e^{-r dt} P v)` to a sup-norm
/// change below `1e-10`, then repeats on a lattice widened by 25% per side
/// and reports the change at the central nodes.
pub fn dp_stopping_oracle(
    payoff: &PayoffSpec,
    model: &LevyModel,
    r: Discount,
    c: f64,
    lattice: &LatticeSpec,
) -> Result<StoppingOracle> {
    let rv = r.value();
    let chain = build_chain(model, lattice)?;
    let (values, iterations) = solve(payoff, model, rv, c, lattice, &chain)?;
    let extra = lattice.nodes / 4;
    let wide = lattice.widened(extra);
    let wide_chain = build_chain(model, &wide)?;
    let (wide_values, _) = solve(payoff, model, rv, c, &wide, &wide_chain)?;
    let n = lattice.nodes;
    let influence = (n / 4..n - n / 4)
        .map(|i| (values[i] - wide_values[i + extra]).abs())
        .fold(0.0, f64::max);
    if influence > 1e-4 {
        return Err(Error::Precondition(format!(
            "lattice [{}, {}] is too narrow: widening changes interior values by {influence:.3e}",
            lattice.x_lo, lattice.x_hi
        )));
    }
    let tol = 1e-12 * c.abs().max(1.0);
    let threshold_node = values.iter().position(|&v| v >= c - tol);
    let grid = lattice.grid();
    Ok(StoppingOracle {
        threshold: threshold_node.map(|i| grid[i]),
        grid,
        values,
        threshold_node,
        iterations,
        boundary_influence: influence,
    })
}
