//! Subgradient of the follower cost along a path, and the first-order
//! optimality conditions it must satisfy.
//!
//! For a threshold strategy with reflection level `b` the pair `(X, theta)`
//! is Markov, so
//! `p_t = -E[int_t^inf c_x(X_u - theta_u) e^{-r(u-t)} du | X_t, theta_t]`
//! equals `-E[c_x(X_T - theta_T)] / r` for an independent `T ~ Exp(r)`
//! started from the current pair. `DJ_t = K + p_t`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy::{Discount, LevyModel, SamplePath, Stepper, Track};
use crate::mc;
use crate::numerics::mean_and_stderr;

use super::{ControlPath, FollowerCostSpec};

/// Nested simulation settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerConfig {
    /// Inner replications per evaluation point, run as antithetic pairs.
    pub reps: usize,
    pub step: f64,
    pub seed: u64,
    /// Largest acceptable standard error of a single `DJ` estimate.
    pub se_cap: f64,
    /// Evaluate `DJ` on every `stride`-th grid point.
    pub stride: usize,
}

impl Default for InnerConfig {
    fn default() -> Self {
        InnerConfig {
            reps: 200,
            step: 1e-2,
            seed: 0,
            se_cap: 1.0,
            stride: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointKind {
    /// Grid point, state `(X_{t_i}, theta_{t_i})`.
    Grid,
    /// Control increase over step `i`, at the reflection state.
    Action,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgradientPoint {
    pub index: usize,
    pub time: f64,
    pub kind: PointKind,
    pub x: f64,
    pub theta: f64,
    pub p: f64,
    pub dj: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgradientPath {
    pub step: f64,
    pub k: f64,
    pub threshold: f64,
    pub points: Vec<SubgradientPoint>,
}

/// `DJ` along `outer` for the reflection strategy at `threshold`, whose
/// control on that path is `control`.
pub fn subgradient_path(
    spec: &FollowerCostSpec,
    model: &LevyModel,
    threshold: f64,
    r: Discount,
    outer: &SamplePath,
    control: &ControlPath,
    inner: &InnerConfig,
) -> Result<SubgradientPath> {
    if inner.reps < 4 || inner.stride == 0 {
        return Err(Error::Config(format!(
            "inner simulation needs reps >= 4 and stride >= 1, got {} and {}",
            inner.reps, inner.stride
        )));
    }
    if control.theta.len() != outer.len() {
        return Err(Error::Config("control and path grids differ".into()));
    }
    let rv = r.value();
    let stepper = Stepper::new(model, inner.step)?;
    let dt = outer.step;
    let mut states = Vec::new();
    for i in (0..outer.len()).step_by(inner.stride) {
        states.push((i, PointKind::Grid, outer.values[i], control.theta[i]));
    }
    for i in 0..outer.len() {
        if control.increment(i) > 0.0 {
            let th = control.theta[i];
            states.push((i, PointKind::Action, th + threshold, th));
        }
    }
    let pairs = inner.reps / 2;
    let points = states
        .par_iter()
        .enumerate()
        .map(|(j, &(index, kind, x, theta))| {
            let seed = mc::derive_seed(inner.seed, j as u64);
            let samples: Vec<f64> = (0..pairs as u64)
                .map(|k| {
                    let one = |anti: bool| {
                        let mut rng = mc::stream(seed, k);
                        let o = stepper.run_to_exponential_time(&mut rng, x, rv, Track::Max, anti);
                        let th = theta.max(o.max - threshold);
                        -spec.c_x.eval(o.end - th) / rv
                    };
                    0.5 * (one(false) + one(true))
                })
                .collect();
            let (p, se) = mean_and_stderr(&samples);
            if se > inner.se_cap {
                return Err(Error::Budget(format!(
                    "inner standard error {se:.3e} exceeds the cap {} at t = {}",
                    inner.se_cap,
                    index as f64 * dt
                )));
            }
            Ok(SubgradientPoint {
                index,
                time: index as f64 * dt,
                kind,
                x,
                theta,
                p,
                dj: spec.k + p,
                stderr: se,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SubgradientPath {
        step: dt,
        k: spec.k,
        threshold,
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Largest acceptable fraction of grid points with `DJ < -se_multiple SE`.
    pub max_violation_rate: f64,
    pub se_multiple: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            max_violation_rate: 0.01,
            se_multiple: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatOff {
    pub sum: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub positivity_violation_rate: f64,
    pub grid_points: usize,
    pub positivity_pass: bool,
    pub flatoff: FlatOff,
    pub flatoff_pass: bool,
    /// `min DJ / SE` over grid points; informational.
    pub snell_min_z: f64,
    pub snell_pass: bool,
    pub pass: bool,
}

/// Positivity `DJ >= 0` on the grid and flat-off `int DJ e^{-rt} d theta = 0`.
pub fn verify_first_order(
    subgrad: &SubgradientPath,
    control: &ControlPath,
    r: Discount,
    tol: &Tolerances,
) -> VerificationReport {
    let rv = r.value();
    let grid: Vec<&SubgradientPoint> = subgrad
        .points
        .iter()
        .filter(|p| p.kind == PointKind::Grid)
        .collect();
    let below = |p: &SubgradientPoint| p.dj < -tol.se_multiple * p.stderr;
    let violations = grid.iter().filter(|p| below(p)).count();
    let rate = if grid.is_empty() {
        0.0
    } else {
        violations as f64 / grid.len() as f64
    };
    let mut sum = 0.0;
    let mut var = 0.0;
    for p in subgrad.points.iter().filter(|p| p.kind == PointKind::Action) {
        let w = (-rv * p.time).exp() * control.increment(p.index);
        sum += w * p.dj;
        var += (w * p.stderr).powi(2);
    }
    let se = var.sqrt();
    let flat_ok = sum.abs() <= tol.se_multiple * se || sum == 0.0;
    let snell_min_z = grid
        .iter()
        .map(|p| if p.stderr > 0.0 { p.dj / p.stderr } else if p.dj < 0.0 { f64::NEG_INFINITY } else { f64::INFINITY })
        .fold(f64::INFINITY, f64::min);
    let positivity_pass = rate <= tol.max_violation_rate;
    VerificationReport {
        positivity_violation_rate: rate,
        grid_points: grid.len(),
        positivity_pass,
        flatoff: FlatOff { sum, stderr: se },
        flatoff_pass: flat_ok,
        snell_min_z,
        snell_pass: snell_min_z >= -tol.se_multiple,
        pass: positivity_pass && flat_ok,
    }
}
