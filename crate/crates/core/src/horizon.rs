//! Truncation horizons for discounted integrals `E[int_0^inf f(X_t) e^{-rt} dt]`.
//!
//! A horizon `H` is accepted when the discounted tail beyond `H` is at most
//! `TAIL_FRACTION` of the total discounted mass.

use crate::error::{Error, Result};
use crate::func::RealFn;
use crate::levy::LevyModel;
use crate::numerics::integrate;

pub const TAIL_FRACTION: f64 = 1e-3;

/// Horizon from an analytic bound on `E|g(X_t)|` when `X_0 = x`.
///
/// Exponential functions use `E[e^{cX_t}] = e^{cx + psi(c) t}`; polynomials
/// use the first two moments of `X_t`. `Custom` functions have no bound and
/// return `None`.
pub fn analytic_horizon(g: &RealFn, model: &LevyModel, r: f64, x: f64) -> Result<Option<f64>> {
    match g {
        RealFn::Exp { scale, rate } => {
            if *scale == 0.0 {
                return Ok(Some(1.0 / r));
            }
            let psi = model.laplace_exponent(*rate).map_err(|e| {
                Error::Horizon(format!("growth rate of exp({rate} x) is undefined: {e}"))
            })?;
            let decay = r - psi;
            if decay <= 0.0 {
                return Err(Error::Horizon(format!(
                    "r - psi({rate}) = {decay} <= 0: the discounted payoff does not decay"
                )));
            }
            Ok(Some(-(TAIL_FRACTION).ln() / decay))
        }
        RealFn::Affine { .. } | RealFn::Quadratic { .. } => {
            let [c0, c1, c2] = g.polynomial_coefficients().unwrap_or([0.0; 3]);
            let (mu, var) = model.unit_moments();
            let bound = move |t: f64| {
                let m1 = x + mu * t;
                let m2 = m1 * m1 + var * t;
                c0.abs() + c1.abs() * m2.sqrt() + c2.abs() * m2
            };
            Ok(Some(horizon_from_bound(bound, r)?))
        }
        RealFn::Custom { .. } => Ok(None),
    }
}

/// Smallest `H` (to 1% relative) with `int_H^inf e^{-rt} B(t) dt <=
/// TAIL_FRACTION * int_0^inf e^{-rt} B(t) dt` for a polynomially growing
/// envelope `B`.
pub fn horizon_from_bound<B: Fn(f64) -> f64>(bound: B, r: f64) -> Result<f64> {
    let far = 200.0 / r;
    let mass = |a: f64, b: f64| integrate(|t| bound(t) * (-r * t).exp(), a, b, 1e-300, 1e-10).0;
    let total = mass(0.0, far);
    if !(total.is_finite()) {
        return Err(Error::Horizon("discounted envelope is not integrable".into()));
    }
    if total == 0.0 {
        return Ok(1.0 / r);
    }
    let tail = |h: f64| mass(h, far);
    let mut hi = 1.0 / r;
    while tail(hi) > TAIL_FRACTION * total {
        hi *= 2.0;
        if hi > far {
            return Err(Error::Horizon(
                "discounted tail bound cannot be met below 200 / r".into(),
            ));
        }
    }
    let mut lo = 0.0;
    while hi - lo > 0.01 * hi {
        let mid = 0.5 * (lo + hi);
        if tail(mid) > TAIL_FRACTION * total {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Horizon from a pilot profile `m[i] ~ E|f_t| e^{-rt}` sampled every
/// `step` time units. Fails when the profile has not decayed by its end.
pub fn horizon_from_profile(profile: &[f64], step: f64) -> Result<f64> {
    let n = profile.len();
    if n < 8 {
        return Err(Error::Horizon("pilot profile too short".into()));
    }
    let total: f64 = profile.iter().sum();
    if !total.is_finite() {
        return Err(Error::Horizon("pilot discounted mass is not finite".into()));
    }
    if total == 0.0 {
        return Ok(step * n as f64 / 8.0);
    }
    let last: f64 = profile[n - n / 8..].iter().sum();
    if last > 0.1 * TAIL_FRACTION * total {
        return Err(Error::Horizon(format!(
            "discounted integrand has not decayed over the pilot window: last eighth holds {:.3e} of the mass",
            last / total
        )));
    }
    let mut tail = 0.0;
    for i in (0..n).rev() {
        tail += profile[i];
        if tail > TAIL_FRACTION * total {
            return Ok(step * (i + 1) as f64);
        }
    }
    Ok(step)
}
