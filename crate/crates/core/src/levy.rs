//! Lévy models with compound-Poisson jumps: Laplace exponents, their right
//! inverses, Esscher tilts, differences of independent processes and path
//! simulation.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1, Open01, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mc;
use crate::numerics::bisect;

/// Jump size distribution of a compound-Poisson component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JumpLaw {
    /// Upward jumps with density `a e^{-a y}` on `y > 0`.
    ExponentialUp { a: f64 },
    /// Downward jumps `-Y` with `Y ~ Exp(b)`.
    ExponentialDown { b: f64 },
    /// Upward `Exp(a)` with probability `p`, otherwise downward `Exp(b)`.
    TwoSided { a: f64, b: f64, p: f64 },
    /// Deterministic jump of the given size.
    PointMass { size: f64 },
}

impl JumpLaw {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            JumpLaw::ExponentialUp { a } => a > 0.0 && a.is_finite(),
            JumpLaw::ExponentialDown { b } => b > 0.0 && b.is_finite(),
            JumpLaw::TwoSided { a, b, p } => {
                a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() && (0.0..=1.0).contains(&p)
            }
            JumpLaw::PointMass { size } => size != 0.0 && size.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid jump law {self:?}")))
        }
    }

    /// Open interval on which the moment generating function is finite.
    pub fn mgf_domain(&self) -> (f64, f64) {
        match *self {
            JumpLaw::ExponentialUp { a } => (f64::NEG_INFINITY, a),
            JumpLaw::ExponentialDown { b } => (-b, f64::INFINITY),
            JumpLaw::TwoSided { a, b, p } => (
                if p < 1.0 { -b } else { f64::NEG_INFINITY },
                if p > 0.0 { a } else { f64::INFINITY },
            ),
            JumpLaw::PointMass { .. } => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// `E[e^{cJ}]`, assuming `c` is inside the domain.
    pub fn mgf(&self, c: f64) -> f64 {
        match *self {
            JumpLaw::ExponentialUp { a } => a / (a - c),
            JumpLaw::ExponentialDown { b } => b / (b + c),
            JumpLaw::TwoSided { a, b, p } => {
                let up = if p > 0.0 { p * a / (a - c) } else { 0.0 };
                let down = if p < 1.0 { (1.0 - p) * b / (b + c) } else { 0.0 };
                up + down
            }
            JumpLaw::PointMass { size } => (c * size).exp(),
        }
    }

    pub fn mgf_complex(&self, s: Complex64) -> Complex64 {
        match *self {
            JumpLaw::ExponentialUp { a } => a / (a - s),
            JumpLaw::ExponentialDown { b } => b / (b + s),
            JumpLaw::TwoSided { a, b, p } => {
                let mut m = Complex64::new(0.0, 0.0);
                if p > 0.0 {
                    m += p * a / (a - s);
                }
                if p < 1.0 {
                    m += (1.0 - p) * b / (b + s);
                }
                m
            }
            JumpLaw::PointMass { size } => (s * size).exp(),
        }
    }

    /// `k`-th derivative of the MGF at `c` for `k` in 1..=2.
    fn mgf_derivative(&self, c: f64, k: i32) -> f64 {
        let fact = if k == 2 { 2.0 } else { 1.0 };
        match *self {
            JumpLaw::ExponentialUp { a } => fact * a / (a - c).powi(k + 1),
            JumpLaw::ExponentialDown { b } => {
                fact * b * (-1.0f64).powi(k) / (b + c).powi(k + 1)
            }
            JumpLaw::TwoSided { a, b, p } => {
                JumpLaw::ExponentialUp { a }.mgf_derivative(c, k) * p
                    + JumpLaw::ExponentialDown { b }.mgf_derivative(c, k) * (1.0 - p)
            }
            JumpLaw::PointMass { size } => size.powi(k) * (c * size).exp(),
        }
    }

    pub fn has_positive(&self) -> bool {
        match *self {
            JumpLaw::ExponentialUp { .. } => true,
            JumpLaw::ExponentialDown { .. } => false,
            JumpLaw::TwoSided { p, .. } => p > 0.0,
            JumpLaw::PointMass { size } => size > 0.0,
        }
    }

    pub fn has_negative(&self) -> bool {
        match *self {
            JumpLaw::ExponentialUp { .. } => false,
            JumpLaw::ExponentialDown { .. } => true,
            JumpLaw::TwoSided { p, .. } => p < 1.0,
            JumpLaw::PointMass { size } => size < 0.0,
        }
    }

    /// Law of `-J`.
    pub fn negated(&self) -> JumpLaw {
        match *self {
            JumpLaw::ExponentialUp { a } => JumpLaw::ExponentialDown { b: a },
            JumpLaw::ExponentialDown { b } => JumpLaw::ExponentialUp { a: b },
            JumpLaw::TwoSided { a, b, p } => JumpLaw::TwoSided {
                a: b,
                b: a,
                p: 1.0 - p,
            },
            JumpLaw::PointMass { size } => JumpLaw::PointMass { size: -size },
        }
    }

    /// Exponentially tilted law `e^{cy} F(dy) / M(c)`.
    fn tilted(&self, c: f64) -> JumpLaw {
        match *self {
            JumpLaw::ExponentialUp { a } => JumpLaw::ExponentialUp { a: a - c },
            JumpLaw::ExponentialDown { b } => JumpLaw::ExponentialDown { b: b + c },
            JumpLaw::TwoSided { a, b, p } => {
                let up = if p > 0.0 { p * a / (a - c) } else { 0.0 };
                JumpLaw::TwoSided {
                    a: a - c,
                    b: b + c,
                    p: up / self.mgf(c),
                }
            }
            JumpLaw::PointMass { size } => JumpLaw::PointMass { size },
        }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            JumpLaw::ExponentialUp { a } => {
                let e: f64 = Exp1.sample(rng);
                e / a
            }
            JumpLaw::ExponentialDown { b } => {
                let e: f64 = Exp1.sample(rng);
                -e / b
            }
            JumpLaw::TwoSided { a, b, p } => {
                let u: f64 = rng.random();
                let e: f64 = Exp1.sample(rng);
                if u < p {
                    e / a
                } else {
                    -e / b
                }
            }
            JumpLaw::PointMass { size } => size,
        }
    }
}

/// One compound-Poisson component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpComponent {
    pub rate: f64,
    pub law: JumpLaw,
}

/// A Lévy process `X_t = drift t + sigma W_t + sum of jumps`. The drift is
/// not compensated, so `psi(c) = drift c + sigma^2 c^2 / 2 +
/// sum rate (M(c) - 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevyModel {
    pub drift: f64,
    pub sigma: f64,
    pub jumps: Vec<JumpComponent>,
}

/// Positive discount rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Discount(f64);

impl Discount {
    pub fn new(r: f64) -> Result<Self> {
        if r > 0.0 && r.is_finite() {
            Ok(Discount(r))
        } else {
            Err(Error::Config(format!("discount rate must satisfy r > 0, got {r}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl LevyModel {
    pub fn new(drift: f64, sigma: f64, jumps: Vec<JumpComponent>) -> Result<Self> {
        if !drift.is_finite() {
            return Err(Error::Config(format!("drift must be finite, got {drift}")));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::Config(format!("sigma must satisfy sigma >= 0, got {sigma}")));
        }
        for j in &jumps {
            if !(j.rate > 0.0 && j.rate.is_finite()) {
                return Err(Error::Config(format!(
                    "jump rate must satisfy rate > 0, got {}",
                    j.rate
                )));
            }
            j.law.validate()?;
        }
        Ok(LevyModel { drift, sigma, jumps })
    }

    pub fn brownian(drift: f64, sigma: f64) -> Result<Self> {
        Self::new(drift, sigma, Vec::new())
    }

    pub fn standard_brownian() -> Self {
        LevyModel {
            drift: 0.0,
            sigma: 1.0,
            jumps: Vec::new(),
        }
    }

    pub fn zero() -> Self {
        LevyModel {
            drift: 0.0,
            sigma: 0.0,
            jumps: Vec::new(),
        }
    }

    pub fn with_jumps(drift: f64, sigma: f64, rate: f64, law: JumpLaw) -> Result<Self> {
        Self::new(drift, sigma, vec![JumpComponent { rate, law }])
    }

    /// No negative jumps.
    pub fn spectrally_positive(&self) -> bool {
        self.jumps.iter().all(|j| !j.law.has_negative())
    }

    /// No positive jumps.
    pub fn spectrally_negative(&self) -> bool {
        self.jumps.iter().all(|j| !j.law.has_positive())
    }

    /// Paths are monotone: no Gaussian part and drift and jumps all push
    /// the same way.
    pub fn monotone_paths(&self) -> bool {
        self.sigma == 0.0
            && ((self.drift >= 0.0 && self.spectrally_positive())
                || (self.drift <= 0.0 && self.spectrally_negative()))
    }

    pub fn jump_intensity(&self) -> f64 {
        self.jumps.iter().map(|j| j.rate).sum()
    }

    /// Open interval on which `psi` is finite.
    pub fn mgf_domain(&self) -> (f64, f64) {
        self.jumps.iter().fold((f64::NEG_INFINITY, f64::INFINITY), |(lo, hi), j| {
            let (a, b) = j.law.mgf_domain();
            (lo.max(a), hi.min(b))
        })
    }

    pub fn in_domain(&self, c: f64) -> bool {
        let (lo, hi) = self.mgf_domain();
        c > lo && c < hi
    }

    fn check_domain(&self, c: f64) -> Result<()> {
        if self.in_domain(c) && c.is_finite() {
            Ok(())
        } else {
            let (lo, hi) = self.mgf_domain();
            Err(Error::Domain(format!(
                "c = {c} is outside the MGF domain ({lo}, {hi})"
            )))
        }
    }

    /// Laplace exponent `psi(c) = log E[e^{c X_1}]`.
    pub fn laplace_exponent(&self, c: f64) -> Result<f64> {
        self.check_domain(c)?;
        Ok(self.psi_unchecked(c))
    }

    pub(crate) fn psi_unchecked(&self, c: f64) -> f64 {
        if c == 0.0 {
            return 0.0;
        }
        let jumps: f64 = self.jumps.iter().map(|j| j.rate * (j.law.mgf(c) - 1.0)).sum();
        self.drift * c + 0.5 * self.sigma * self.sigma * c * c + jumps
    }

    /// `psi` continued to complex arguments.
    pub fn laplace_exponent_complex(&self, s: Complex64) -> Complex64 {
        let mut v = s * self.drift + 0.5 * self.sigma * self.sigma * s * s;
        for j in &self.jumps {
            v += j.rate * (j.law.mgf_complex(s) - 1.0);
        }
        v
    }

    /// `psi'(c)`.
    pub fn psi_prime(&self, c: f64) -> Result<f64> {
        self.check_domain(c)?;
        let jumps: f64 = self
            .jumps
            .iter()
            .map(|j| j.rate * j.law.mgf_derivative(c, 1))
            .sum();
        Ok(self.drift + self.sigma * self.sigma * c + jumps)
    }

    /// `psi''(c)`.
    pub fn psi_second(&self, c: f64) -> Result<f64> {
        self.check_domain(c)?;
        let jumps: f64 = self
            .jumps
            .iter()
            .map(|j| j.rate * j.law.mgf_derivative(c, 2))
            .sum();
        Ok(self.sigma * self.sigma + jumps)
    }

    /// Mean and variance of `X_1`.
    pub fn unit_moments(&self) -> (f64, f64) {
        // zero is always inside the domain
        (
            self.psi_prime(0.0).unwrap_or(f64::NAN),
            self.psi_second(0.0).unwrap_or(f64::NAN),
        )
    }

    /// Model of `-X`.
    pub fn dual(&self) -> LevyModel {
        difference_model(&LevyModel::zero(), self)
    }
}

/// Laplace exponent `psi(c)`; see [`LevyModel::laplace_exponent`].
pub fn laplace_exponent(model: &LevyModel, c: f64) -> Result<f64> {
    model.laplace_exponent(c)
}

/// The unique `beta > 0` with `psi(beta) = r`.
pub fn phi_right_inverse(model: &LevyModel, r: Discount) -> Result<f64> {
    if model.monotone_paths() {
        return Err(Error::MonotonePaths(
            "the right inverse needs a model whose paths are not monotone".into(),
        ));
    }
    let r = r.value();
    let (_, upper) = model.mgf_domain();
    let mut lo = 0.0;
    let mut hi = if upper > 1.0 { 1.0 } else { 0.5 * upper };
    let mut found = false;
    for _ in 0..2200 {
        if model.psi_unchecked(hi) >= r {
            found = true;
            break;
        }
        lo = hi;
        if hi > 1e15 {
            break;
        }
        let doubled = 2.0 * hi;
        hi = if doubled < upper {
            doubled
        } else {
            hi + 0.5 * (upper - hi)
        };
        if hi <= lo {
            break;
        }
    }
    if !found {
        return Err(Error::NoRoot(format!(
            "psi stays below r = {r} on its domain (last bracket end {hi})"
        )));
    }
    let f = |b: f64| model.psi_unchecked(b) - r;
    let mut phi = bisect(f, lo, hi, 1e-12)?;
    let tol = 1e-10 * r.max(1.0);
    if f(phi).abs() > tol {
        phi = bisect(f, lo, hi, 0.0)?;
    }
    if f(phi).abs() > tol {
        return Err(Error::NoRoot(format!(
            "psi(Phi) - r = {} exceeds {tol} at Phi = {phi}",
            f(phi)
        )));
    }
    Ok(phi)
}

/// Esscher transform by `c`: the model under `e^{c X_t - psi(c) t} dP`.
pub fn esscher_tilt(model: &LevyModel, c: f64) -> Result<LevyModel> {
    model.check_domain(c)?;
    if c == 0.0 {
        return Ok(model.clone());
    }
    let jumps = model
        .jumps
        .iter()
        .map(|j| JumpComponent {
            rate: j.rate * j.law.mgf(c),
            law: j.law.tilted(c),
        })
        .collect();
    LevyModel::new(model.drift + model.sigma * model.sigma * c, model.sigma, jumps)
}

/// Model of `Y - X` for independent `Y` and `X`.
pub fn difference_model(model_y: &LevyModel, model_x: &LevyModel) -> LevyModel {
    let mut jumps = model_y.jumps.clone();
    jumps.extend(model_x.jumps.iter().map(|j| JumpComponent {
        rate: j.rate,
        law: j.law.negated(),
    }));
    LevyModel {
        drift: model_y.drift - model_x.drift,
        sigma: model_y.sigma.hypot(model_x.sigma),
        jumps,
    }
}

/// Discretised trajectory on the grid `0, step, 2 step, ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    pub step: f64,
    pub values: Vec<f64>,
    pub seed: u64,
    pub replication: u64,
    /// Maximum over each step `[t_i, t_{i+1}]`, when tracked.
    pub step_max: Option<Vec<f64>>,
    /// Minimum over each step, when tracked.
    pub step_min: Option<Vec<f64>>,
}

impl SamplePath {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.step * (self.values.len().saturating_sub(1)) as f64
    }

    /// Upper envelope over step `i` (grid value if extrema were not tracked).
    #[inline]
    pub fn upper(&self, i: usize) -> f64 {
        match &self.step_max {
            Some(m) => m[i],
            None => self.values[i].max(self.values[i + 1]),
        }
    }

    #[inline]
    pub fn lower(&self, i: usize) -> f64 {
        match &self.step_min {
            Some(m) => m[i],
            None => self.values[i].min(self.values[i + 1]),
        }
    }

    /// Restriction to the first `n + 1` grid points.
    pub fn truncated(&self, n: usize) -> SamplePath {
        let n = n.min(self.values.len() - 1);
        SamplePath {
            step: self.step,
            values: self.values[..=n].to_vec(),
            seed: self.seed,
            replication: self.replication,
            step_max: self.step_max.as_ref().map(|m| m[..n].to_vec()),
            step_min: self.step_min.as_ref().map(|m| m[..n].to_vec()),
        }
    }
}

/// Which within-step extrema to sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Track {
    None,
    Max,
    Min,
    Both,
}

impl Track {
    fn max(self) -> bool {
        matches!(self, Track::Max | Track::Both)
    }
    fn min(self) -> bool {
        matches!(self, Track::Min | Track::Both)
    }
}

/// Result of one step: end value and extrema over the step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub end: f64,
    pub max: f64,
    pub min: f64,
    /// End of the continuous part, before the jumps of the step.
    pub continuous_end: f64,
}

/// Result of a run to an independent exponential time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpTimeOutcome {
    pub time: f64,
    pub end: f64,
    pub max: f64,
    pub min: f64,
}

/// Exact one-step sampler. The Gaussian part is sampled exactly together
/// with its Brownian-bridge extrema; jumps are placed at the end of the
/// step.
#[derive(Debug, Clone)]
pub struct Stepper {
    model: LevyModel,
    dt: f64,
    drift_dt: f64,
    sd: f64,
    poisson: Vec<Option<Poisson<f64>>>,
}

impl Stepper {
    pub fn new(model: &LevyModel, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Config(format!("step must be positive, got {dt}")));
        }
        let poisson = model
            .jumps
            .iter()
            .map(|j| Poisson::new(j.rate * dt).ok())
            .collect();
        Ok(Stepper {
            model: model.clone(),
            dt,
            drift_dt: model.drift * dt,
            sd: model.sigma * dt.sqrt(),
            poisson,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn model(&self) -> &LevyModel {
        &self.model
    }

    /// One full step from `x`. With `antithetic` the normal draw is negated
    /// and bridge uniforms are reflected; jump draws are unchanged.
    #[inline]
    pub fn step<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        x: f64,
        track: Track,
        antithetic: bool,
    ) -> StepOutcome {
        let (end, max, min) = self.continuous(rng, x, self.drift_dt, self.sd, self.dt, track, antithetic);
        let mut jump = 0.0;
        for (j, pois) in self.model.jumps.iter().zip(&self.poisson) {
            if let Some(p) = pois {
                let n = p.sample(rng) as u64;
                for _ in 0..n {
                    jump += j.law.sample(rng);
                }
            }
        }
        let end_j = end + jump;
        StepOutcome {
            end: end_j,
            max: max.max(end_j),
            min: min.min(end_j),
            continuous_end: end,
        }
    }

    /// A step of length `tau` (used for the final partial step).
    pub fn partial_step<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        x: f64,
        tau: f64,
        track: Track,
        antithetic: bool,
    ) -> StepOutcome {
        if tau <= 0.0 {
            return StepOutcome {
                end: x,
                max: x,
                min: x,
                continuous_end: x,
            };
        }
        let (end, max, min) = self.continuous(
            rng,
            x,
            self.model.drift * tau,
            self.model.sigma * tau.sqrt(),
            tau,
            track,
            antithetic,
        );
        let mut jump = 0.0;
        for j in &self.model.jumps {
            if let Ok(p) = Poisson::new(j.rate * tau) {
                let n = p.sample(rng) as u64;
                for _ in 0..n {
                    jump += j.law.sample(rng);
                }
            }
        }
        let end_j = end + jump;
        StepOutcome {
            end: end_j,
            max: max.max(end_j),
            min: min.min(end_j),
            continuous_end: end,
        }
    }

    #[allow(clippy::too_many_arguments)]
    #[inline]
    fn continuous<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        x: f64,
        mean: f64,
        sd: f64,
        dt: f64,
        track: Track,
        antithetic: bool,
    ) -> (f64, f64, f64) {
        let mut z: f64 = StandardNormal.sample(rng);
        if antithetic {
            z = -z;
        }
        let end = x + mean + sd * z;
        let var = self.model.sigma * self.model.sigma * dt;
        let mut max = x.max(end);
        let mut min = x.min(end);
        if track.max() {
            let mut u: f64 = Open01.sample(rng);
            if antithetic {
                u = 1.0 - u;
            }
            if var > 0.0 {
                let d = end - x;
                max = 0.5 * (x + end + (d * d - 2.0 * var * u.ln()).sqrt());
            }
        }
        if track.min() {
            let mut u: f64 = Open01.sample(rng);
            if antithetic {
                u = 1.0 - u;
            }
            if var > 0.0 {
                let d = end - x;
                min = 0.5 * (x + end - (d * d - 2.0 * var * u.ln()).sqrt());
            }
        }
        (end, max, min)
    }

    /// Runs from `x` to an independent `T ~ Exp(r)`, drawn first from the
    /// same stream.
    pub fn run_to_exponential_time<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        x: f64,
        r: f64,
        track: Track,
        antithetic: bool,
    ) -> ExpTimeOutcome {
        let e: f64 = Exp1.sample(rng);
        let t = e / r;
        let full = (t / self.dt).floor() as u64;
        let mut state = StepOutcome {
            end: x,
            max: x,
            min: x,
            continuous_end: x,
        };
        for _ in 0..full {
            let s = self.step(rng, state.end, track, antithetic);
            state = StepOutcome {
                max: state.max.max(s.max),
                min: state.min.min(s.min),
                ..s
            };
        }
        let tau = t - full as f64 * self.dt;
        let s = self.partial_step(rng, state.end, tau, track, antithetic);
        ExpTimeOutcome {
            time: t,
            end: s.end,
            max: state.max.max(s.max),
            min: state.min.min(s.min),
        }
    }
}

fn step_count(horizon: f64, step: f64) -> Result<usize> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Config(format!("step must be positive, got {step}")));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::Config(format!("horizon must be positive, got {horizon}")));
    }
    let n = (horizon / step).round();
    if n < 1.0 || (n * step - horizon).abs() > 1e-6 * horizon {
        return Err(Error::Config(format!(
            "step {step} does not divide horizon {horizon}"
        )));
    }
    Ok(n as usize)
}

/// Simulates `X` on `[0, horizon]` from `start` with replication `0` of
/// `seed`.
pub fn simulate_path(
    model: &LevyModel,
    horizon: f64,
    step: f64,
    start: f64,
    seed: u64,
) -> Result<SamplePath> {
    simulate_replication(model, horizon, step, start, seed, 0, Track::None)
}

/// Simulates replication `replication` of `seed`, optionally recording the
/// bridge extrema of every step.
pub fn simulate_replication(
    model: &LevyModel,
    horizon: f64,
    step: f64,
    start: f64,
    seed: u64,
    replication: u64,
    track: Track,
) -> Result<SamplePath> {
    let n = step_count(horizon, step)?;
    let stepper = Stepper::new(model, step)?;
    let mut rng = mc::stream(seed, replication);
    Ok(simulate_with(&stepper, &mut rng, n, start, seed, replication, track))
}

pub(crate) fn simulate_with<R: Rng + ?Sized>(
    stepper: &Stepper,
    rng: &mut R,
    n: usize,
    start: f64,
    seed: u64,
    replication: u64,
    track: Track,
) -> SamplePath {
    let mut values = Vec::with_capacity(n + 1);
    let mut maxs = if track.max() { Some(Vec::with_capacity(n)) } else { None };
    let mut mins = if track.min() { Some(Vec::with_capacity(n)) } else { None };
    values.push(start);
    let mut x = start;
    for _ in 0..n {
        let s = stepper.step(rng, x, track, false);
        if let Some(m) = maxs.as_mut() {
            m.push(s.max);
        }
        if let Some(m) = mins.as_mut() {
            m.push(s.min);
        }
        x = s.end;
        values.push(x);
    }
    SamplePath {
        step: stepper.dt(),
        values,
        seed,
        replication,
        step_max: maxs,
        step_min: mins,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psi_examples() {
        let bm = LevyModel::standard_brownian();
        assert_eq!(bm.laplace_exponent(1.0).unwrap(), 0.5);
        let m = LevyModel::brownian(-1.0, 1.0).unwrap();
        assert_eq!(m.laplace_exponent(2.0).unwrap(), 0.0);
        let j = LevyModel::with_jumps(0.0, 0.0, 1.0, JumpLaw::ExponentialUp { a: 2.0 }).unwrap();
        assert_eq!(j.laplace_exponent(1.0).unwrap(), 1.0);
        assert!(matches!(j.laplace_exponent(2.0), Err(Error::Domain(_))));
        assert_eq!(j.laplace_exponent(0.0).unwrap(), 0.0);
    }

    #[test]
    fn phi_examples() {
        let bm = LevyModel::standard_brownian();
        let p = phi_right_inverse(&bm, Discount::new(2.0).unwrap()).unwrap();
        assert!((p - 2.0).abs() < 1e-11);
        let p = phi_right_inverse(&bm, Discount::new(0.5).unwrap()).unwrap();
        assert!((p - 1.0).abs() < 1e-11);
        let m = LevyModel::brownian(-0.5, 1.0).unwrap();
        let p = phi_right_inverse(&m, Discount::new(0.5).unwrap()).unwrap();
        assert!((p - (0.5 + 1.25f64.sqrt())).abs() < 1e-11);
        assert!((m.laplace_exponent(p).unwrap() - 0.5).abs() <= 1e-10);
    }

    #[test]
    fn phi_near_domain_boundary() {
        let j = LevyModel::with_jumps(-3.0, 0.0, 1.0, JumpLaw::ExponentialUp { a: 0.5 }).unwrap();
        let r = Discount::new(0.1).unwrap();
        let p = phi_right_inverse(&j, r).unwrap();
        assert!(p < 0.5);
        assert!((j.laplace_exponent(p).unwrap() - 0.1).abs() <= 1e-10);
    }

    #[test]
    fn phi_errors() {
        let down = LevyModel::brownian(-1.0, 0.0).unwrap();
        assert!(matches!(
            phi_right_inverse(&down, Discount::new(1.0).unwrap()),
            Err(Error::MonotonePaths(_))
        ));
    }

    #[test]
    fn tilt_examples() {
        let bm = LevyModel::brownian(0.3, 2.0).unwrap();
        let t = esscher_tilt(&bm, 0.5).unwrap();
        assert_eq!(t.drift, 0.3 + 4.0 * 0.5);
        assert_eq!(t.sigma, 2.0);
        let j = LevyModel::with_jumps(0.0, 0.0, 1.0, JumpLaw::ExponentialUp { a: 2.0 }).unwrap();
        let t = esscher_tilt(&j, 1.0).unwrap();
        assert_eq!(t.jumps[0].rate, 2.0);
        assert_eq!(t.jumps[0].law, JumpLaw::ExponentialUp { a: 1.0 });
        assert_eq!(esscher_tilt(&j, 0.0).unwrap(), j);
    }

    #[test]
    fn difference_examples() {
        let bm = LevyModel::standard_brownian();
        let z = difference_model(&bm, &bm);
        assert_eq!(z.sigma, 2f64.sqrt());
        assert_eq!(z.drift, 0.0);
        let y = LevyModel::with_jumps(0.2, 0.7, 1.5, JumpLaw::ExponentialUp { a: 3.0 }).unwrap();
        assert_eq!(difference_model(&y, &LevyModel::zero()), y);
    }

    #[test]
    fn drift_only_path_is_deterministic_grid() {
        let m = LevyModel::brownian(1.0, 0.0).unwrap();
        let p = simulate_path(&m, 1.0, 0.1, 0.0, 3).unwrap();
        assert_eq!(p.values.len(), 11);
        for (i, v) in p.values.iter().enumerate() {
            assert!((v - 0.1 * i as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn bad_step_is_config_error() {
        let bm = LevyModel::standard_brownian();
        assert!(matches!(simulate_path(&bm, 1.0, 0.0, 0.0, 1), Err(Error::Config(_))));
        assert!(matches!(simulate_path(&bm, 1.0, 0.3, 0.0, 1), Err(Error::Config(_))));
    }

    #[test]
    fn bridge_extrema_bracket_endpoints() {
        let m = LevyModel::with_jumps(0.1, 1.0, 3.0, JumpLaw::TwoSided { a: 2.0, b: 2.0, p: 0.5 })
            .unwrap();
        let p = simulate_replication(&m, 1.0, 0.01, 0.0, 5, 2, Track::Both).unwrap();
        let mx = p.step_max.as_ref().unwrap();
        let mn = p.step_min.as_ref().unwrap();
        for i in 0..mx.len() {
            assert!(mx[i] >= p.values[i].max(p.values[i + 1]));
            assert!(mn[i] <= p.values[i].min(p.values[i + 1]));
        }
    }
}
