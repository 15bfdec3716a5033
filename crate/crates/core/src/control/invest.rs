//! Irreversible investment: maximise `E[int p(theta_t) q(X_t) e^{-rt} dt -
//! K int e^{-rt} d theta_t]`.

use crate::error::{Error, Result};
use crate::func::RealFn;
use crate::levy::{Discount, LevyModel, SamplePath};
use crate::numerics::bisect;
use crate::wiener_hopf::{expected_functional, infimum_law, ExtremaLaw};

use super::ControlPath;

/// Production function `p` with its marginal product.
#[derive(Debug, Clone)]
pub enum Production {
    /// `p(theta) = coef * theta^exponent` with `0 < exponent < 1`.
    Power { coef: f64, exponent: f64 },
    /// Arbitrary concave `p` with derivative `p_theta`; the inverse of
    /// `p_theta` is found by bisection.
    Custom { p: RealFn, p_theta: RealFn },
}

impl Production {
    pub fn eval(&self, theta: f64) -> f64 {
        match self {
            Production::Power { coef, exponent } => coef * theta.max(0.0).powf(*exponent),
            Production::Custom { p, .. } => p.eval(theta),
        }
    }

    pub fn marginal(&self, theta: f64) -> f64 {
        match self {
            Production::Power { coef, exponent } => coef * exponent * theta.powf(exponent - 1.0),
            Production::Custom { p_theta, .. } => p_theta.eval(theta),
        }
    }

    /// `p_theta(0)`, possibly infinite.
    pub fn marginal_at_zero(&self) -> f64 {
        match self {
            Production::Power { .. } => f64::INFINITY,
            Production::Custom { p_theta, .. } => p_theta.eval(0.0),
        }
    }

    /// Solves `p_theta(theta) = y` for `0 < y < p_theta(0)`.
    pub fn marginal_inverse(&self, y: f64) -> Result<f64> {
        match self {
            Production::Power { coef, exponent } => {
                Ok((y / (coef * exponent)).powf(1.0 / (exponent - 1.0)))
            }
            Production::Custom { p_theta, .. } => {
                let mut hi = 1.0;
                while p_theta.eval(hi) > y {
                    hi *= 2.0;
                    if hi > 1e300 {
                        return Err(Error::NoRoot(format!(
                            "p_theta stays above {y} on [0, 1e300]"
                        )));
                    }
                }
                // p_theta(0) may be infinite
                bisect(|t| (y - p_theta.eval(t)).max(-f64::MAX), 0.0, hi, 1e-13 * hi.max(1.0))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct InvestSpec {
    pub production: Production,
    pub q: RealFn,
    pub k: f64,
}

impl InvestSpec {
    pub fn new(production: Production, q: RealFn, k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::Config(format!(
                "investment cost K must be positive (the supremum is not attained at K = 0), got {k}"
            )));
        }
        if let Production::Power { coef, exponent } = production {
            if !(coef > 0.0 && exponent > 0.0 && exponent < 1.0) {
                return Err(Error::Config(format!(
                    "power production needs coef > 0 and exponent in (0, 1), got {coef}, {exponent}"
                )));
            }
        }
        let probe: Vec<f64> = (1..=200).map(|i| 0.05 * i as f64).collect();
        for w in probe.windows(2) {
            let (a, b) = (production.marginal(w[0]), production.marginal(w[1]));
            if !(a > 0.0 && b > 0.0 && b < a) {
                return Err(Error::Config(format!(
                    "p_theta must be positive and strictly decreasing, got p_theta({}) = {a}, p_theta({}) = {b}",
                    w[0], w[1]
                )));
            }
        }
        for x in (0..=200).map(|i| -10.0 + 0.1 * i as f64) {
            if !(q.eval(x) > 0.0) {
                return Err(Error::Config(format!("q must be positive, got q({x}) = {}", q.eval(x))));
            }
        }
        Ok(InvestSpec { production, q, k })
    }
}

/// `L(x) = p_theta^{-1}(rK / E[q(x + inf X)])`, zero when the argument is at
/// least `p_theta(0)`.
#[derive(Debug, Clone)]
pub struct InvestIndex {
    spec: InvestSpec,
    law: ExtremaLaw,
    r: f64,
}

impl InvestIndex {
    pub fn new(spec: &InvestSpec, model: &LevyModel, r: Discount) -> Result<Self> {
        Ok(InvestIndex {
            spec: spec.clone(),
            law: infimum_law(model, r)?,
            r: r.value(),
        })
    }

    /// `E[q(x + inf X)]`.
    pub fn q_mean(&self, x: f64) -> Result<f64> {
        let m = expected_functional(&self.law, &self.spec.q, x)?.value;
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::Integrability(format!(
                "E[q(x + inf X)] must be finite and positive, got {m} at x = {x}"
            )));
        }
        Ok(m)
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let y = self.r * self.spec.k / self.q_mean(x)?;
        if y >= self.spec.production.marginal_at_zero() {
            return Ok(0.0);
        }
        self.spec.production.marginal_inverse(y)
    }

    /// Upper bound `rK q(x) / E[q(x + inf X)]` on the marginal profit
    /// `p_theta(theta*_t) q(X_t)` when `X_t = x`.
    pub fn marginal_profit_ceiling(&self, x: f64) -> Result<f64> {
        Ok(self.r * self.spec.k * self.spec.q.eval(x) / self.q_mean(x)?)
    }

    pub fn spec(&self) -> &InvestSpec {
        &self.spec
    }
}

pub fn invest_index(spec: &InvestSpec, model: &LevyModel, r: Discount, x: f64) -> Result<f64> {
    InvestIndex::new(spec, model, r)?.eval(x)
}

/// `theta_t = sup_{u <= t} L(X_u)` for nondecreasing `L`, using within-step
/// maxima when the path carries them.
pub fn invest_control<L: Fn(f64) -> f64>(path: &SamplePath, index: L) -> ControlPath {
    let n = path.len();
    let mut theta = Vec::with_capacity(n);
    let mut cur = index(path.values[0]).max(0.0);
    theta.push(cur);
    let mut top = path.values[0];
    for i in 0..n - 1 {
        let u = path.upper(i);
        if u > top {
            top = u;
            cur = cur.max(index(u));
        }
        theta.push(cur);
    }
    ControlPath {
        step: path.step,
        theta,
    }
}

/// `p(theta) = C theta^{beta (1 - alpha)}`, `q(x) = e^{alpha beta x}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CobbDouglasSpec {
    pub c: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl CobbDouglasSpec {
    pub fn new(c: f64, alpha: f64, beta: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::Config(format!("C must be positive, got {c}")));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        if !(beta > 0.0 && beta < 1.0 / (1.0 - alpha)) {
            return Err(Error::Config(format!(
                "beta must lie in (0, 1/(1 - alpha)) = (0, {}), got {beta}",
                1.0 / (1.0 - alpha)
            )));
        }
        Ok(CobbDouglasSpec { c, alpha, beta })
    }

    fn elasticity(&self) -> f64 {
        self.beta * (1.0 - self.alpha)
    }

    pub fn gamma(&self) -> f64 {
        self.alpha * self.beta / (1.0 - self.elasticity())
    }

    pub fn a_coef(&self) -> f64 {
        self.c * self.elasticity()
    }

    pub fn invest_spec(&self, k: f64) -> Result<InvestSpec> {
        InvestSpec::new(
            Production::Power {
                coef: self.c,
                exponent: self.elasticity(),
            },
            RealFn::Exp {
                scale: 1.0,
                rate: self.alpha * self.beta,
            },
            k,
        )
    }

    /// `delta = (A E[e^{alpha beta inf X}] / (rK))^{1/(1 - beta(1 - alpha))}`,
    /// so that `L(x) = delta e^{gamma x}`.
    pub fn delta(&self, model: &LevyModel, r: Discount, k: f64) -> Result<f64> {
        let law = infimum_law(model, r)?;
        let q = RealFn::Exp {
            scale: 1.0,
            rate: self.alpha * self.beta,
        };
        let m = expected_functional(&law, &q, 0.0)?.value;
        Ok((self.a_coef() * m / (r.value() * k)).powf(1.0 / (1.0 - self.elasticity())))
    }
}
