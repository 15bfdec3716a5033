//! Parameterised stopping problems `v(x, c)` with retirement reward `c`,
//! and the perpetual American put.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::func::RealFn;
use crate::gittins::{locate_threshold, ExtendedReal, GittinsCurve, IndexFn, PayoffSpec, Direction};
use crate::levy::{Discount, LevyModel, Stepper, Track};
use crate::mc::{self, McEstimate, SimConfig};
use crate::wiener_hopf::{expected_functional, infimum_law};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Stop,
    Continue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoppingResult {
    pub value: McEstimate,
    pub threshold: ExtendedReal,
    pub region: Region,
}

struct Prepared {
    threshold: ExtendedReal,
    curve: GittinsCurve,
}

fn prepare(payoff: &PayoffSpec, model: &LevyModel, r: Discount, c: f64, x: f64) -> Result<Prepared> {
    if payoff.direction != Direction::Increasing {
        return Err(Error::Precondition(
            "stopping values are defined for increasing payoffs".into(),
        ));
    }
    if !c.is_finite() {
        return Err(Error::Config(format!("reward c must be finite, got {c}")));
    }
    let (threshold, curve) = locate_threshold(payoff, model, r, c, x)?;
    if threshold == ExtendedReal::PosInf {
        return Err(Error::NoRoot(format!(
            "never stop: the index stays below c = {c} up to x = {}",
            curve.grid[curve.grid.len() - 1]
        )));
    }
    Ok(Prepared { threshold, curve })
}

/// `v(x, c) = inf_tau E_x[int_0^tau g(X_t) e^{-rt} dt + c e^{-r tau}]`.
///
/// The optimal rule stops at the first passage above `x*(c)`, so with an
/// independent `T ~ Exp(r)` the value is `E[c 1{sup X >= x*} + g(X_T)/r
/// 1{sup X < x*}]`, simulated exactly at the exponential time.
pub fn stopping_value(
    payoff: &PayoffSpec,
    model: &LevyModel,
    r: Discount,
    c: f64,
    x: f64,
    sim: &SimConfig,
) -> Result<StoppingResult> {
    sim.validate()?;
    let prep = prepare(payoff, model, r, c, x)?;
    if prep.threshold.le(x) {
        return Ok(StoppingResult {
            value: McEstimate::exact(c),
            threshold: prep.threshold,
            region: Region::Stop,
        });
    }
    let x_star = prep.threshold.finite().expect("continuation implies a finite threshold");
    let rv = r.value();
    let stepper = Stepper::new(model, sim.step)?;
    let samples = mc::replicate(sim.seed, sim.reps, |rng, _| {
        let o = stepper.run_to_exponential_time(rng, x, rv, Track::Max, false);
        if o.max >= x_star {
            c
        } else {
            payoff.g.eval(o.end) / rv
        }
    });
    Ok(StoppingResult {
        value: McEstimate::from_samples(&samples, sim.seed),
        threshold: prep.threshold,
        region: Region::Continue,
    })
}

/// Same value through `v = G - E[(kappa(sup X) - c)^+]` on the paths used by
/// [`stopping_value`] for the same seed.
pub fn stopping_value_repr(
    payoff: &PayoffSpec,
    model: &LevyModel,
    r: Discount,
    c: f64,
    x: f64,
    sim: &SimConfig,
) -> Result<McEstimate> {
    sim.validate()?;
    let prep = prepare(payoff, model, r, c, x)?;
    let index = IndexFn::with_curve(payoff, model, r, prep.curve)?;
    let rv = r.value();
    let stepper = Stepper::new(model, sim.step)?;
    let samples = mc::replicate(sim.seed, sim.reps, |rng, _| {
        let o = stepper.run_to_exponential_time(rng, x, rv, Track::Max, false);
        payoff.g.eval(o.end) / rv - (index.eval(o.max) - c).max(0.0)
    });
    Ok(McEstimate::from_samples(&samples, sim.seed))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PutResult {
    pub price: McEstimate,
    /// Exercise boundary `b*` in price units: exercise once `e^X <= b*`.
    pub threshold: f64,
    pub horizon: f64,
}

/// Perpetual American put on `e^X` with strike `strike`, started at
/// `e^x`.
///
/// The exercise boundary is `b* = K E[e^{inf X}]` at an independent
/// `Exp(r)` time. The price is simulated up to the boundary's first passage
/// with bridge crossing probabilities folded in analytically.
pub fn perpetual_put(
    model: &LevyModel,
    r: Discount,
    strike: f64,
    x: f64,
    sim: &SimConfig,
) -> Result<PutResult> {
    sim.validate()?;
    if !(strike >= 0.0 && strike.is_finite()) {
        return Err(Error::Config(format!("strike must be nonnegative, got {strike}")));
    }
    let rv = r.value();
    let psi1 = model
        .laplace_exponent(1.0)
        .map_err(|e| Error::Precondition(format!("psi(1) is undefined: {e}")))?;
    if psi1 >= rv {
        return Err(Error::Precondition(format!(
            "perpetual put needs psi(1) < r, got psi(1) = {psi1} and r = {rv}"
        )));
    }
    if strike == 0.0 {
        return Ok(PutResult {
            price: McEstimate::exact(0.0),
            threshold: 0.0,
            horizon: 0.0,
        });
    }
    let law = infimum_law(model, r)?;
    let b_star = strike * expected_functional(&law, &RealFn::exp(), 0.0)?.value;
    let level = b_star.ln();
    let horizon = sim.horizon.unwrap_or(1e4f64.ln() / rv);
    if x <= level {
        return Ok(PutResult {
            price: McEstimate::exact(strike - x.exp()),
            threshold: b_star,
            horizon,
        });
    }
    let n = (horizon / sim.step).ceil() as usize;
    let stepper = Stepper::new(model, sim.step)?;
    let dt = sim.step;
    let var = model.sigma * model.sigma * dt;
    let at_level = strike - b_star;
    let samples = mc::replicate(sim.seed, sim.reps, |rng, _| {
        let mut alive = 1.0;
        let mut total = 0.0;
        let mut xv = x;
        for i in 0..n {
            let s = stepper.step(rng, xv, Track::None, false);
            let t0 = i as f64 * dt;
            let b = s.continuous_end;
            let p_cross = if b <= level {
                1.0
            } else if var > 0.0 {
                (-2.0 * (xv - level) * (b - level) / var).exp()
            } else {
                0.0
            };
            total += alive * p_cross * at_level * (-rv * (t0 + 0.5 * dt)).exp();
            alive *= 1.0 - p_cross;
            if s.end <= level {
                total += alive * (strike - s.end.exp()) * (-rv * (t0 + dt)).exp();
                alive = 0.0;
            }
            if alive == 0.0 {
                break;
            }
            xv = s.end;
        }
        total
    });
    Ok(PutResult {
        price: McEstimate::from_samples(&samples, sim.seed),
        threshold: b_star,
        horizon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stop_region_returns_c_exactly() {
        let bm = LevyModel::standard_brownian();
        let r = Discount::new(0.5).unwrap();
        let p = PayoffSpec::increasing(RealFn::linear(0.5));
        // kappa(x) = x - 1, threshold 1
        let res = stopping_value(&p, &bm, r, 0.0, 2.0, &SimConfig::new(100, 1e-2, 1)).unwrap();
        assert_eq!(res.region, Region::Stop);
        assert_eq!(res.value.mean, 0.0);
        assert!((res.threshold.finite().unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn never_stop_is_no_root() {
        let bm = LevyModel::standard_brownian();
        let r = Discount::new(0.5).unwrap();
        let p = PayoffSpec::increasing(RealFn::constant(0.5 * (2.0 - 1.0)));
        let e = stopping_value(&p, &bm, r, 2.0, 0.0, &SimConfig::new(100, 1e-2, 1)).unwrap_err();
        assert!(e.to_string().contains("never stop"));
    }

    #[test]
    fn zero_strike_put() {
        let m = LevyModel::brownian(-0.5, 1.0).unwrap();
        let res = perpetual_put(&m, Discount::new(0.5).unwrap(), 0.0, 0.0, &SimConfig::new(10, 1e-2, 0)).unwrap();
        assert_eq!(res.price.mean, 0.0);
        assert_eq!(res.threshold, 0.0);
    }
}
