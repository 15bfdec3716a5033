//! Policy comparison on common random numbers.

use serde::{Deserialize, Serialize};

use crate::control::{policy_costs, Problem, Strategy};
use crate::error::Result;
use crate::levy::{Discount, LevyModel};
use crate::mc::{self, McEstimate, SimConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub name: String,
    pub cost: McEstimate,
    /// `cost - cost of the first strategy`, paired replication by
    /// replication.
    pub paired_diff: McEstimate,
    /// Standard error the difference would have on independent paths.
    pub unpaired_stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub horizon: f64,
    pub x0: f64,
    pub rows: Vec<ComparisonRow>,
}

/// Evaluates every strategy on the same paths. Differences are taken
/// against the first strategy.
pub fn policy_comparison(
    problem: &Problem,
    model: &LevyModel,
    r: Discount,
    strategies: &[&dyn Strategy],
    x0: f64,
    sim: &SimConfig,
) -> Result<ComparisonTable> {
    let (rows, horizon) = policy_costs(problem, model, strategies, r, x0, sim)?;
    let base = McEstimate::from_samples(&rows[0], sim.seed);
    let out = strategies
        .iter()
        .zip(&rows)
        .map(|(s, samples)| {
            let cost = McEstimate::from_samples(samples, sim.seed);
            ComparisonRow {
                name: s.name(),
                paired_diff: mc::paired_difference(&rows[0], samples, sim.seed),
                unpaired_stderr: cost.stderr.hypot(base.stderr),
                cost,
            }
        })
        .collect();
    Ok(ComparisonTable {
        horizon,
        x0,
        rows: out,
    })
}
