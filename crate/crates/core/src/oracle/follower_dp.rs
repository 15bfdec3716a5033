//! Singular-control dynamic programming for the monotone follower on the
//! gap coordinate `y = x - theta`.

use serde::{Deserialize, Serialize};

use crate::control::FollowerCostSpec;
use crate::error::{Error, Result};
use crate::levy::{Discount, LevyModel};

use super::lattice::{apply, build_chain, Boundary, LatticeSpec};
use super::stopping_dp::discounted_mean;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FollowerOracle {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Smallest node where acting beats continuing; the top node when the
    /// control never acts on the lattice.
    pub boundary_node: usize,
    pub boundary: f64,
    pub acts: bool,
    pub iterations: usize,
}

const SUP_TOL: f64 = 1e-10;
const MAX_SWEEPS: usize = 50_000_000;

/// Iterates `v(y) = min(c(y)(1 - e^{-r dt})/r + e^{-r dt} P v(y), v(y - h) +
/// K h)` with an ascending sweep over the action step. Above the lattice
/// the gap is pushed down to the top node at cost `K` per unit; below it
/// the uncontrolled discounted cost is used.
pub fn dp_follower_oracle(
    spec: &FollowerCostSpec,
    model: &LevyModel,
    r: Discount,
    lattice: &LatticeSpec,
) -> Result<FollowerOracle> {
    let rv = r.value();
    let chain = build_chain(model, lattice)?;
    let grid = lattice.grid();
    let n = grid.len();
    let h = lattice.spacing();
    let disc = (-rv * lattice.dt).exp();
    let running: Vec<f64> = grid.iter().map(|&y| spec.c.eval(y) * (1.0 - disc) / rv).collect();
    let below = match lattice.lower {
        Boundary::Absorbing => discounted_mean(&spec.c, model, rv),
        Boundary::Reflecting => None,
    };
    let act = spec.k * h;
    let mut v: Vec<f64> = match &below {
        Some(gf) => grid.iter().map(|&y| gf(y)).collect(),
        None => grid.iter().map(|&y| spec.c.eval(y) / rv).collect(),
    };
    let mut cont = vec![0.0; n];
    let ghost = |j: isize, v: &[f64]| -> f64 {
        if j >= n as isize {
            v[n - 1] + spec.k * (j - (n as isize - 1)) as f64 * h
        } else {
            match &below {
                Some(gf) => gf(lattice.x_lo + j as f64 * h),
                None => v[0],
            }
        }
    };
    for sweep in 1..=MAX_SWEEPS {
        {
            let vref = &v;
            apply(&chain, vref, &|j| ghost(j, vref), &mut cont);
        }
        let mut diff: f64 = 0.0;
        for i in 0..n {
            let mut new = running[i] + disc * cont[i];
            if i > 0 {
                new = new.min(v[i - 1] + act);
            }
            diff = diff.max((new - v[i]).abs());
            v[i] = new;
        }
        if diff < SUP_TOL {
            // recompute continuation at the fixed point to classify nodes
            {
                let vref = &v;
                apply(&chain, vref, &|j| ghost(j, vref), &mut cont);
            }
            let boundary = (1..n).find(|&i| v[i - 1] + act < running[i] + disc * cont[i]);
            let boundary_node = boundary.unwrap_or(n - 1);
            return Ok(FollowerOracle {
                boundary: grid[boundary_node],
                grid,
                values: v,
                boundary_node,
                acts: boundary.is_some(),
                iterations: sweep,
            });
        }
    }
    Err(Error::Convergence(format!(
        "follower value iteration did not reach {SUP_TOL} in {MAX_SWEEPS} sweeps"
    )))
}
