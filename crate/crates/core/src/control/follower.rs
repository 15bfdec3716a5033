//! Monotone follower: minimise `E[int c(X_t - theta_t) e^{-rt} dt + K int
//! e^{-rt} d theta_t]` over nondecreasing `theta`.

use crate::error::{Error, Result};
use crate::func::RealFn;
use crate::levy::{Discount, LevyModel, SamplePath};
use crate::numerics::{bisect, expand_bracket_increasing};
use crate::wiener_hopf::{expected_functional, infimum_law};

use super::ControlPath;

#[derive(Debug, Clone)]
pub struct FollowerCostSpec {
    pub c: RealFn,
    pub c_x: RealFn,
    pub k: f64,
}

impl FollowerCostSpec {
    /// Validates `K >= 0` and that `c_x` is nondecreasing on a probe grid.
    pub fn new(c: RealFn, c_x: RealFn, k: f64) -> Result<Self> {
        if !(k >= 0.0 && k.is_finite()) {
            return Err(Error::Config(format!("intervention cost K must be >= 0, got {k}")));
        }
        let probe: Vec<f64> = (0..=200).map(|i| -10.0 + 0.1 * i as f64).collect();
        for w in probe.windows(2) {
            if c_x.eval(w[1]) < c_x.eval(w[0]) {
                return Err(Error::Config(format!(
                    "c_x must be nondecreasing (convex cost), but c_x({}) > c_x({})",
                    w[0], w[1]
                )));
            }
        }
        Ok(FollowerCostSpec { c, c_x, k })
    }

    /// `c(y) = scale * y^2 / 2`.
    pub fn quadratic(scale: f64, k: f64) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(Error::Config(format!("quadratic cost scale must be positive, got {scale}")));
        }
        let c = RealFn::Quadratic {
            a: 0.5 * scale,
            b: 0.0,
            c: 0.0,
        };
        let c_x = c.derivative().expect("quadratic has a derivative");
        Self::new(c, c_x, k)
    }

    /// Builds the spec from a cost function with a structured derivative.
    pub fn from_cost(c: RealFn, k: f64) -> Result<Self> {
        let c_x = c.derivative().ok_or_else(|| {
            Error::Config(format!("cost {c:?} has no closed-form derivative; supply c_x"))
        })?;
        Self::new(c, c_x, k)
    }
}

/// Root of `kappa(x) = E[c_x(x + inf X)] / r - K`, to `1e-9`.
pub fn follower_threshold(spec: &FollowerCostSpec, model: &LevyModel, r: Discount) -> Result<f64> {
    let law = infimum_law(model, r)?;
    let rv = r.value();
    let kappa = |x: f64| -> Result<f64> {
        Ok(expected_functional(&law, &spec.c_x, x)?.value / rv - spec.k)
    };
    // surface integrability errors before the bracket search
    kappa(0.0)?;
    let f = |x: f64| kappa(x).unwrap_or(f64::NAN);
    let (lo, hi) = expand_bracket_increasing(f, 0.0, 1.0, 1e6).map_err(|b| {
        let regime = if b.f_hi < 0.0 {
            "never act"
        } else if b.f_lo > 0.0 {
            "always act immediately"
        } else {
            "index is not finite"
        };
        Error::NoRoot(format!(
            "{regime}: kappa({}) = {:.6e}, kappa({}) = {:.6e}",
            b.lo, b.f_lo, b.hi, b.f_hi
        ))
    })?;
    bisect(f, lo, hi, 1e-10)
}

/// `theta_t = sup_{u <= t} (X_u - x*)^+`, using the within-step maxima
/// when the path carries them.
pub fn follower_control(path: &SamplePath, x_star: f64) -> ControlPath {
    let n = path.len();
    let mut theta = Vec::with_capacity(n);
    let mut cur = (path.values[0] - x_star).max(0.0);
    theta.push(cur);
    for i in 0..n - 1 {
        cur = cur.max(path.upper(i) - x_star);
        theta.push(cur);
    }
    ControlPath {
        step: path.step,
        theta,
    }
}
