//! Gittins index functions
//! `kappa(x) = E[g(x + X_inf)] / r` and `mu(x) = E[g(x + X_sup)] / r`
//! at an independent exponential time, their monotone tabulation and
//! threshold extraction.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::func::RealFn;
use crate::horizon::{analytic_horizon, horizon_from_profile};
use crate::levy::{self, Discount, LevyModel, Stepper, Track};
use crate::mc::{self, McEstimate, Estimate};
use crate::numerics::isotonic_increasing;
use crate::wiener_hopf::{expected_functional, infimum_law, supremum_law, ExtremaLaw, LawKind};

/// Monotonicity of a payoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Increasing,
    Decreasing,
}

/// Running payoff `g` of the stopping problem.
#[derive(Debug, Clone)]
pub struct PayoffSpec {
    pub g: RealFn,
    pub direction: Direction,
}

impl PayoffSpec {
    pub fn increasing(g: RealFn) -> Self {
        PayoffSpec {
            g,
            direction: Direction::Increasing,
        }
    }

    pub fn decreasing(g: RealFn) -> Self {
        PayoffSpec {
            g,
            direction: Direction::Decreasing,
        }
    }

    /// Checks the declared direction on `grid`.
    pub fn check_direction(&self, grid: &[f64]) -> Result<()> {
        let vals: Vec<f64> = grid.iter().map(|&x| self.g.eval(x)).collect();
        for (i, w) in vals.windows(2).enumerate() {
            let bad = match self.direction {
                Direction::Increasing => w[1] < w[0],
                Direction::Decreasing => w[1] > w[0],
            };
            if bad {
                return Err(Error::Monotonicity(format!(
                    "payoff {:?} is declared {:?} but g({}) = {} and g({}) = {}",
                    self.g,
                    self.direction,
                    grid[i],
                    w[0],
                    grid[i + 1],
                    w[1]
                )));
            }
        }
        Ok(())
    }
}

/// Which extremum the curve integrates against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveSide {
    /// `kappa`, nondecreasing for increasing payoffs.
    UsesInfimum,
    /// `mu`, nonincreasing for decreasing payoffs.
    UsesSupremum,
}

/// Tabulated index function with piecewise-linear interpolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GittinsCurve {
    pub side: CurveSide,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Largest move made by the isotonic projection.
    pub max_displacement: f64,
}

/// Real number or an infinite sentinel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtendedReal {
    NegInf,
    Finite(f64),
    PosInf,
}

impl ExtendedReal {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// Orders `x` against the value (`x >= self`).
    pub fn le(self, x: f64) -> bool {
        match self {
            ExtendedReal::NegInf => true,
            ExtendedReal::Finite(v) => v <= x,
            ExtendedReal::PosInf => false,
        }
    }
}

impl GittinsCurve {
    fn nondecreasing(&self) -> bool {
        self.side == CurveSide::UsesInfimum
    }

    /// Piecewise-linear interpolation, extended linearly beyond the grid.
    pub fn eval(&self, x: f64) -> f64 {
        let g = &self.grid;
        let n = g.len();
        let i = g.partition_point(|&v| v <= x).clamp(1, n - 1);
        let (x0, x1) = (g[i - 1], g[i]);
        let (v0, v1) = (self.values[i - 1], self.values[i]);
        v0 + (v1 - v0) * (x - x0) / (x1 - x0)
    }

    /// Same curve with the grid reflected, so a nonincreasing curve becomes
    /// nondecreasing.
    fn reflected(&self) -> GittinsCurve {
        GittinsCurve {
            side: match self.side {
                CurveSide::UsesInfimum => CurveSide::UsesSupremum,
                CurveSide::UsesSupremum => CurveSide::UsesInfimum,
            },
            grid: self.grid.iter().rev().map(|x| -x).collect(),
            values: self.values.iter().rev().copied().collect(),
            stderr: self.stderr.iter().rev().copied().collect(),
            max_displacement: self.max_displacement,
        }
    }
}

fn law_for(direction: Direction, model: &LevyModel, r: Discount) -> Result<ExtremaLaw> {
    match direction {
        Direction::Increasing => infimum_law(model, r),
        Direction::Decreasing => supremum_law(model, r),
    }
}

/// `E[g(x + extremum)] / r` against a prebuilt law.
pub fn index_with_law(law: &ExtremaLaw, payoff: &PayoffSpec, r: Discount, x: f64) -> Result<Estimate> {
    let e = expected_functional(law, &payoff.g, x)?;
    Ok(Estimate {
        value: e.value / r.value(),
        stderr: e.stderr / r.value(),
    })
}

/// `kappa(x) = E[g(x + X_inf)] / r` for an increasing payoff.
pub fn kappa(payoff: &PayoffSpec, model: &LevyModel, r: Discount, x: f64) -> Result<Estimate> {
    if payoff.direction != Direction::Increasing {
        return Err(Error::Precondition("kappa needs an increasing payoff".into()));
    }
    index_with_law(&infimum_law(model, r)?, payoff, r, x)
}

/// `mu(x) = E[g(x + X_sup)] / r` for a decreasing payoff.
pub fn mu(payoff: &PayoffSpec, model: &LevyModel, r: Discount, x: f64) -> Result<Estimate> {
    if payoff.direction != Direction::Decreasing {
        return Err(Error::Precondition("mu needs a decreasing payoff".into()));
    }
    index_with_law(&supremum_law(model, r)?, payoff, r, x)
}

/// Tabulates `kappa` (increasing payoff) or `mu` (decreasing payoff) on
/// `nodes` uniform points of `[x_lo, x_hi]`.
pub fn build_curve(
    payoff: &PayoffSpec,
    model: &LevyModel,
    r: Discount,
    x_lo: f64,
    x_hi: f64,
    nodes: usize,
) -> Result<GittinsCurve> {
    let law = law_for(payoff.direction, model, r)?;
    build_curve_with_law(payoff, &law, r, x_lo, x_hi, nodes)
}

pub fn build_curve_with_law(
    payoff: &PayoffSpec,
    law: &ExtremaLaw,
    r: Discount,
    x_lo: f64,
    x_hi: f64,
    nodes: usize,
) -> Result<GittinsCurve> {
    if !(x_lo < x_hi) || nodes < 3 {
        return Err(Error::Config(format!(
            "curve grid needs x_lo < x_hi and at least 3 nodes, got [{x_lo}, {x_hi}] with {nodes}"
        )));
    }
    let h = (x_hi - x_lo) / (nodes - 1) as f64;
    let grid: Vec<f64> = (0..nodes)
        .map(|i| if i == nodes - 1 { x_hi } else { x_lo + i as f64 * h })
        .collect();
    payoff.check_direction(&grid)?;
    let raw: Vec<Estimate> = grid
        .par_iter()
        .map(|&x| index_with_law(law, payoff, r, x))
        .collect::<Result<_>>()?;
    let increasing = payoff.direction == Direction::Increasing;
    let vals: Vec<f64> = raw
        .iter()
        .map(|e| if increasing { e.value } else { -e.value })
        .collect();
    let projected = isotonic_increasing(&vals);
    let mut max_disp: f64 = 0.0;
    for (i, (a, b)) in vals.iter().zip(&projected).enumerate() {
        let d = (a - b).abs();
        max_disp = max_disp.max(d);
        let allowed = if law.is_empirical() {
            5.0 * raw[i].stderr
        } else {
            1e-6 * a.abs().max(1.0)
        };
        if d > allowed {
            return Err(Error::Monotonicity(format!(
                "isotonic projection moved node x = {} by {d:.3e} (allowed {allowed:.3e})",
                grid[i]
            )));
        }
    }
    let values = projected
        .into_iter()
        .map(|v| if increasing { v } else { -v })
        .collect();
    Ok(GittinsCurve {
        side: if increasing {
            CurveSide::UsesInfimum
        } else {
            CurveSide::UsesSupremum
        },
        grid,
        values,
        stderr: raw.iter().map(|e| e.stderr).collect(),
        max_displacement: max_disp,
    })
}

/// Boundary of the stopping region `{index >= c}`.
///
/// For a nondecreasing curve this is the smallest `x` with `kappa(x) >= c`:
/// `NegInf` when the first node already reaches `c`, and `PosInf` when no
/// node does and the last segment, extended by at most one grid width,
/// does not reach `c` either. For a nonincreasing curve it is the largest
/// `x` with `mu(x) >= c`, with the sentinels mirrored.
pub fn gittins_threshold(curve: &GittinsCurve, c: f64) -> ExtendedReal {
    if !curve.nondecreasing() {
        return match gittins_threshold(&curve.reflected(), c) {
            ExtendedReal::NegInf => ExtendedReal::PosInf,
            ExtendedReal::PosInf => ExtendedReal::NegInf,
            ExtendedReal::Finite(v) => ExtendedReal::Finite(-v),
        };
    }
    let (g, v) = (&curve.grid, &curve.values);
    let n = g.len();
    // absorbs rounding in index values that equal c analytically
    let c_eff = c - 1e-12 * c.abs().max(1.0);
    if v[0] >= c_eff {
        return ExtendedReal::NegInf;
    }
    match v.iter().position(|&val| val >= c_eff) {
        Some(i) => {
            let t = (c - v[i - 1]) / (v[i] - v[i - 1]);
            ExtendedReal::Finite(g[i - 1] + t * (g[i] - g[i - 1]))
        }
        None => {
            let slope = (v[n - 1] - v[n - 2]) / (g[n - 1] - g[n - 2]);
            if slope > 0.0 {
                let x = g[n - 1] + (c - v[n - 1]) / slope;
                if x <= g[n - 1] + (g[n - 1] - g[0]) {
                    return ExtendedReal::Finite(x);
                }
            }
            ExtendedReal::PosInf
        }
    }
}

/// Natural half-width of a working grid around a state: a few standard
/// deviations of the model over the discount time scale `1/r`.
pub fn working_half_width(model: &LevyModel, r: Discount) -> f64 {
    let (m, v) = model.unit_moments();
    let t = 1.0 / r.value();
    (6.0 * (v * t).sqrt() + 2.0 * m.abs() * t).max(1.0)
}

/// Threshold for `c`, searched on curves centred at `center` whose width
/// doubles while the answer is a sentinel (at most four times).
pub fn locate_threshold(
    payoff: &PayoffSpec,
    model: &LevyModel,
    r: Discount,
    c: f64,
    center: f64,
) -> Result<(ExtendedReal, GittinsCurve)> {
    let law = law_for(payoff.direction, model, r)?;
    let mut w = working_half_width(model, r);
    let mut last = None;
    for _ in 0..5 {
        let curve = build_curve_with_law(payoff, &law, r, center - w, center + w, 401)?;
        let t = gittins_threshold(&curve, c);
        if t.finite().is_some() {
            return Ok((t, curve));
        }
        last = Some((t, curve));
        w *= 2.0;
    }
    Ok(last.expect("loop runs at least once"))
}

/// Evaluates an index function either in closed form (exact exponential
/// laws) or from a tabulated curve.
pub(crate) enum IndexFn {
    Law(ExtremaLaw, PayoffSpec, Discount),
    Curve(GittinsCurve),
}

impl IndexFn {
    pub(crate) fn new(
        payoff: &PayoffSpec,
        model: &LevyModel,
        r: Discount,
        center: f64,
        half_width: f64,
    ) -> Result<IndexFn> {
        let law = law_for(payoff.direction, model, r)?;
        if matches!(law.kind, LawKind::ExactExponential { .. }) {
            return Ok(IndexFn::Law(law, payoff.clone(), r));
        }
        let curve = build_curve_with_law(
            payoff,
            &law,
            r,
            center - half_width,
            center + half_width,
            401,
        )?;
        Ok(IndexFn::Curve(curve))
    }

    /// Closed form when the law is exact, otherwise `curve`.
    pub(crate) fn with_curve(
        payoff: &PayoffSpec,
        model: &LevyModel,
        r: Discount,
        curve: GittinsCurve,
    ) -> Result<IndexFn> {
        let law = law_for(payoff.direction, model, r)?;
        if matches!(law.kind, LawKind::ExactExponential { .. }) {
            return Ok(IndexFn::Law(law, payoff.clone(), r));
        }
        Ok(IndexFn::Curve(curve))
    }

    pub(crate) fn eval(&self, x: f64) -> f64 {
        match self {
            IndexFn::Law(law, p, r) => index_with_law(law, p, *r, x)
                .map(|e| e.value)
                .unwrap_or(f64::NAN),
            IndexFn::Curve(c) => c.eval(x),
        }
    }
}

/// Estimates `G(x) = E_x[int_0^H g(X_t) e^{-rt} dt]` directly and through
/// `E_x[int_0^H r e^{-rt} sup_{s <= t} kappa(X_s) dt]` (or the infimum of
/// `mu` for decreasing payoffs) on common paths.
pub fn representation_check(
    payoff: &PayoffSpec,
    model: &LevyModel,
    r: Discount,
    x: f64,
    replications: usize,
    step: f64,
    horizon: Option<f64>,
) -> Result<(McEstimate, McEstimate)> {
    let sim = mc::SimConfig {
        reps: replications,
        step,
        seed: 0,
        horizon,
    };
    representation_check_with(payoff, model, r, x, &sim)
}

pub fn representation_check_with(
    payoff: &PayoffSpec,
    model: &LevyModel,
    r: Discount,
    x: f64,
    sim: &mc::SimConfig,
) -> Result<(McEstimate, McEstimate)> {
    sim.validate()?;
    let rv = r.value();
    let horizon = match sim.horizon {
        Some(h) => h,
        None => match analytic_horizon(&payoff.g, model, rv, x)? {
            Some(h) => h,
            None => pilot_horizon(&payoff.g, model, rv, x, sim.seed)?,
        },
    };
    let n = (horizon / sim.step).ceil().max(1.0) as usize;
    let (mu1, var1) = model.unit_moments();
    let spread = 10.0 * (var1 * horizon).sqrt() + mu1.abs() * horizon + 1.0;
    let index = IndexFn::new(payoff, model, r, x, spread)?;
    let stepper = Stepper::new(model, sim.step)?;
    let increasing = payoff.direction == Direction::Increasing;
    let track = if increasing { Track::Max } else { Track::Min };
    let disc = (-rv * sim.step).exp();
    let half = 0.5 * sim.step;
    let pairs = mc::replicate(sim.seed, sim.reps, |rng, _| {
        let mut xv = x;
        let mut ext = x;
        let mut k_ext = index.eval(ext);
        let mut w = 1.0;
        let mut g_prev = payoff.g.eval(xv);
        let mut k_prev = k_ext;
        let (mut direct, mut repr) = (0.0, 0.0);
        for _ in 0..n {
            let s = stepper.step(rng, xv, track, false);
            xv = s.end;
            let moved = if increasing { s.max > ext } else { s.min < ext };
            if moved {
                ext = if increasing { s.max } else { s.min };
                k_ext = index.eval(ext);
            }
            let w_next = w * disc;
            let g_next = payoff.g.eval(xv);
            direct += half * (g_prev * w + g_next * w_next);
            repr += half * (k_prev * w + k_ext * w_next);
            g_prev = g_next;
            k_prev = k_ext;
            w = w_next;
        }
        (direct, rv * repr)
    });
    let direct: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let repr: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    Ok((
        McEstimate::from_samples(&direct, sim.seed),
        McEstimate::from_samples(&repr, sim.seed),
    ))
}

/// Pilot-based horizon for payoffs without an analytic bound.
pub(crate) fn pilot_horizon(g: &RealFn, model: &LevyModel, r: f64, x: f64, seed: u64) -> Result<f64> {
    let step = 0.05 / r.max(1e-12).min(20.0).max(1.0);
    let window = 60.0 / r;
    let n = (window / step).ceil() as usize;
    let stepper = Stepper::new(model, step)?;
    let pilot_seed = mc::derive_seed(seed, 0x5049_4c4f_54);
    let paths = mc::replicate(pilot_seed, 256, |rng, i| {
        levy::simulate_with(&stepper, rng, n, x, pilot_seed, i, Track::None).values
    });
    let profile: Vec<f64> = (0..=n)
        .map(|i| {
            let m: f64 = paths.iter().map(|p| g.eval(p[i]).abs()).sum::<f64>() / paths.len() as f64;
            m * (-r * step * i as f64).exp()
        })
        .collect();
    horizon_from_profile(&profile, step)
}
