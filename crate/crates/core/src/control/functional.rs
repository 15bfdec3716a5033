//! Monte Carlo evaluation of the control objectives.

use crate::error::{Error, Result};
use crate::horizon::horizon_from_profile;
use crate::levy::{self, Discount, LevyModel, SamplePath, Stepper, Track};
use crate::mc::{self, McEstimate, SimConfig};

use super::{ControlPath, FollowerCostSpec, InvestSpec, Strategy};

#[derive(Debug, Clone)]
pub enum Problem {
    /// Cost to minimise.
    Follower(FollowerCostSpec),
    /// Payoff to maximise.
    Invest(InvestSpec),
}

impl Problem {
    /// Running integrand and Stieltjes coefficient.
    #[inline]
    fn running(&self, x: f64, theta: f64) -> f64 {
        match self {
            Problem::Follower(s) => s.c.eval(x - theta),
            Problem::Invest(s) => s.production.eval(theta) * s.q.eval(x),
        }
    }

    #[inline]
    fn stieltjes_coef(&self) -> f64 {
        match self {
            Problem::Follower(s) => s.k,
            Problem::Invest(s) => -s.k,
        }
    }
}

/// Discounted objective along one path. The running integral uses the
/// trapezoid rule on grid values; control increments over a step are
/// discounted with the mean of the discount factors at its ends, and the
/// initial jump with `1`.
pub fn path_objective(problem: &Problem, path: &SamplePath, control: &ControlPath, r: f64) -> f64 {
    let dt = path.step;
    let disc = (-r * dt).exp();
    let k = problem.stieltjes_coef();
    let mut w = 1.0;
    let mut f_prev = problem.running(path.values[0], control.theta[0]);
    let mut running = 0.0;
    let mut stieltjes = control.theta[0];
    for i in 1..path.len() {
        let w_next = w * disc;
        let f = problem.running(path.values[i], control.theta[i]);
        running += 0.5 * dt * (w * f_prev + w_next * f);
        stieltjes += 0.5 * (w + w_next) * (control.theta[i] - control.theta[i - 1]);
        f_prev = f;
        w = w_next;
    }
    running + k * stieltjes
}

/// Horizon from a 256-path pilot run of the strategy on a window of `60/r`.
pub(crate) fn pilot_horizon(
    problem: &Problem,
    model: &LevyModel,
    strategy: &dyn Strategy,
    r: f64,
    x0: f64,
    seed: u64,
) -> Result<f64> {
    let step = 0.05 / r.clamp(1.0, 20.0);
    let n = (60.0 / r / step).ceil() as usize;
    let stepper = Stepper::new(model, step)?;
    let pilot_seed = mc::derive_seed(seed, 0x5049_4c4f_54);
    let k = problem.stieltjes_coef().abs();
    let rows = mc::replicate(pilot_seed, 256, |rng, i| {
        let path = levy::simulate_with(&stepper, rng, n, x0, pilot_seed, i, Track::Max);
        let ctl = strategy.control(&path);
        (0..=n)
            .map(|j| {
                let inc = if j == 0 { 0.0 } else { ctl.theta[j] - ctl.theta[j - 1] };
                problem.running(path.values[j], ctl.theta[j]).abs() + k * inc / step
            })
            .collect::<Vec<f64>>()
    });
    let profile: Vec<f64> = (0..=n)
        .map(|j| {
            let m = rows.iter().map(|row| row[j]).sum::<f64>() / rows.len() as f64;
            m * (-r * step * j as f64).exp()
        })
        .collect();
    horizon_from_profile(&profile, step)
}

fn resolve_horizon(
    problem: &Problem,
    model: &LevyModel,
    strategies: &[&dyn Strategy],
    r: f64,
    x0: f64,
    sim: &SimConfig,
) -> Result<f64> {
    if let Some(h) = sim.horizon {
        return Ok(h);
    }
    let mut h: f64 = 0.0;
    for s in strategies {
        h = h.max(pilot_horizon(problem, model, *s, r, x0, sim.seed)?);
    }
    Ok(h)
}

/// `E[int c(X - theta) e^{-rt} dt + K int e^{-rt} d theta]` for the follower,
/// or `E[int p(theta) q(X) e^{-rt} dt - K int e^{-rt} d theta]` for the
/// investment problem, from `x0`.
pub fn cost_functional(
    problem: &Problem,
    model: &LevyModel,
    strategy: &dyn Strategy,
    r: Discount,
    x0: f64,
    sim: &SimConfig,
) -> Result<McEstimate> {
    let (mut rows, _) = policy_costs(problem, model, &[strategy], r, x0, sim)?;
    Ok(McEstimate::from_samples(&rows.remove(0), sim.seed))
}

/// Per-replication objectives of several strategies on common paths.
/// Returns one sample vector per strategy and the horizon used.
pub fn policy_costs(
    problem: &Problem,
    model: &LevyModel,
    strategies: &[&dyn Strategy],
    r: Discount,
    x0: f64,
    sim: &SimConfig,
) -> Result<(Vec<Vec<f64>>, f64)> {
    sim.validate()?;
    if strategies.is_empty() {
        return Err(Error::Config("no strategies given".into()));
    }
    let rv = r.value();
    let horizon = resolve_horizon(problem, model, strategies, rv, x0, sim)?;
    let n = (horizon / sim.step).ceil().max(1.0) as usize;
    let stepper = Stepper::new(model, sim.step)?;
    let per_rep = mc::replicate(sim.seed, sim.reps, |rng, i| {
        let path = levy::simulate_with(&stepper, rng, n, x0, sim.seed, i, Track::Max);
        strategies
            .iter()
            .map(|s| path_objective(problem, &path, &s.control(&path), rv))
            .collect::<Vec<f64>>()
    });
    let rows = (0..strategies.len())
        .map(|j| per_rep.iter().map(|v| v[j]).collect())
        .collect();
    Ok((rows, horizon))
}
