//! Laws of the running supremum and infimum at an independent exponential
//! time `T(r)`, and scale functions of spectrally negative models.
//!
//! For a model without positive jumps the supremum at `T(r)` is exactly
//! `Exp(Phi(r))`. The infimum of such a model (with a Gaussian part) is
//! handled through its Laplace transform
//! `E[e^{s X_inf}] = (r / Phi) (Phi - s) / (r - psi(s))`, inverted on a
//! Talbot contour; this is the scale-function density
//! `(r / Phi) W'(y) - r W(y)` without the cancellation of the difference.
//! Models with jumps of both signs get an empirical law.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::func::RealFn;
use crate::levy::{phi_right_inverse, Discount, LevyModel, Stepper, Track};
use crate::mc::{self, Estimate};
use crate::numerics::{integrate, mean_and_stderr, simpson, talbot_inverse};

const TALBOT_NODES: usize = 24;

/// Which extremum a law describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Supremum,
    Infimum,
}

impl Side {
    fn sign(self) -> f64 {
        match self {
            Side::Supremum => 1.0,
            Side::Infimum => -1.0,
        }
    }

    fn flipped(self) -> Side {
        match self {
            Side::Supremum => Side::Infimum,
            Side::Infimum => Side::Supremum,
        }
    }
}

/// Law of `|extremum|` for the infimum of a spectrally negative model with
/// a Gaussian part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleFunctionLaw {
    /// Spectrally negative model whose infimum magnitude this is.
    pub model: LevyModel,
    pub r: f64,
    pub phi: f64,
    /// Exponential decay rate of the density (`Phi` of the dual model).
    pub tail_rate: f64,
}

impl ScaleFunctionLaw {
    fn new(model: &LevyModel, r: Discount) -> Result<Self> {
        if !model.spectrally_negative() {
            return Err(Error::Precondition(
                "scale-function laws need a model without positive jumps".into(),
            ));
        }
        if model.sigma <= 0.0 {
            return Err(Error::Precondition(
                "scale-function laws need a Gaussian part (sigma > 0)".into(),
            ));
        }
        let phi = phi_right_inverse(model, r)?;
        let tail_rate = phi_right_inverse(&model.dual(), r)?;
        let law = ScaleFunctionLaw {
            model: model.clone(),
            r: r.value(),
            phi,
            tail_rate,
        };
        let (mass, _) = law.integrate_density(|_| 1.0);
        if (mass - 1.0).abs() > 1e-8 {
            return Err(Error::Inversion(format!(
                "density of the infimum integrates to {mass}, not 1"
            )));
        }
        Ok(law)
    }

    /// `E[e^{-s Y}]` for `Y = -X_inf`.
    pub fn transform(&self, s: Complex64) -> Complex64 {
        let d = s - self.phi;
        if d.norm() < 1e-9 {
            let slope = self.model.psi_prime(self.phi).unwrap_or(f64::NAN);
            return Complex64::new(self.r / self.phi / slope, 0.0);
        }
        (self.r / self.phi) * d / (self.model.laplace_exponent_complex(s) - self.r)
    }

    /// Density of `Y = -X_inf` at `y > 0`.
    pub fn density(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return if y == 0.0 {
                2.0 * self.r / (self.phi * self.model.sigma * self.model.sigma)
            } else {
                0.0
            };
        }
        talbot_inverse(|s| self.transform(s), y, TALBOT_NODES).max(0.0)
    }

    fn cutoff(&self) -> f64 {
        40.0 / self.tail_rate
    }

    /// `int_0^inf h(y) density(y) dy`.
    fn integrate_density<F: Fn(f64) -> f64>(&self, h: F) -> (f64, f64) {
        let top = self.cutoff();
        // split at a few multiples of the mean scale so the adaptive rule
        // sees the peak near zero
        let scale = 1.0 / self.tail_rate;
        let cuts = [0.0, 0.25 * scale, scale, 4.0 * scale, 12.0 * scale, top];
        let mut total = 0.0;
        let mut err = 0.0;
        for w in cuts.windows(2) {
            let (v, e) = integrate(|y| h(y) * self.density(y), w[0], w[1], 1e-12, 1e-11);
            total += v;
            err += e;
        }
        (total, err)
    }
}

/// Representation of an extremum law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LawKind {
    /// `|extremum| ~ Exp(rate)`.
    ExactExponential { rate: f64 },
    ScaleFunction(Box<ScaleFunctionLaw>),
    /// Sorted simulated extrema (signed).
    Empirical {
        samples: Vec<f64>,
        step: f64,
        paths: usize,
    },
}

/// Law of `sup_{t <= T(r)} X_t` or `inf_{t <= T(r)} X_t` started at 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremaLaw {
    pub side: Side,
    pub kind: LawKind,
}

/// Simulation settings for empirical laws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LawConfig {
    pub paths: usize,
    pub step: f64,
    pub seed: u64,
    pub min_paths: usize,
}

impl Default for LawConfig {
    fn default() -> Self {
        LawConfig {
            paths: 100_000,
            step: 1e-3,
            seed: 0,
            min_paths: 1_000,
        }
    }
}

impl ExtremaLaw {
    /// Law of the negated extremum of the dual process.
    fn mirrored(self) -> ExtremaLaw {
        let kind = match self.kind {
            LawKind::Empirical {
                samples,
                step,
                paths,
            } => {
                let mut s: Vec<f64> = samples.iter().rev().map(|v| -v).collect();
                s.shrink_to_fit();
                LawKind::Empirical {
                    samples: s,
                    step,
                    paths,
                }
            }
            k => k,
        };
        ExtremaLaw {
            side: self.side.flipped(),
            kind,
        }
    }

    pub fn is_empirical(&self) -> bool {
        matches!(self.kind, LawKind::Empirical { .. })
    }

    /// Rate of the exponential law, when exact.
    pub fn exponential_rate(&self) -> Option<f64> {
        match self.kind {
            LawKind::ExactExponential { rate } => Some(rate),
            _ => None,
        }
    }

    /// `P(extremum <= v)`.
    pub fn cdf(&self, v: f64) -> f64 {
        // P(+-Y <= v) from the law of the magnitude Y >= 0
        let mag = |p_y_le: &dyn Fn(f64) -> f64| -> f64 {
            match self.side {
                Side::Supremum => {
                    if v < 0.0 {
                        0.0
                    } else {
                        p_y_le(v)
                    }
                }
                Side::Infimum => {
                    if v >= 0.0 {
                        1.0
                    } else {
                        1.0 - p_y_le(-v)
                    }
                }
            }
        };
        match &self.kind {
            LawKind::ExactExponential { rate } => mag(&|y: f64| 1.0 - (-rate * y).exp()),
            LawKind::ScaleFunction(law) => mag(&|y: f64| {
                integrate(|u| law.density(u), 0.0, y, 1e-12, 1e-10).0.min(1.0)
            }),
            LawKind::Empirical { samples, .. } => {
                samples.partition_point(|&x| x <= v) as f64 / samples.len() as f64
            }
        }
    }
}

/// Law of the supremum of `model` at `T(r)`.
pub fn supremum_law(model: &LevyModel, r: Discount) -> Result<ExtremaLaw> {
    supremum_law_with(model, r, &LawConfig::default())
}

/// Law of the infimum of `model` at `T(r)`.
pub fn infimum_law(model: &LevyModel, r: Discount) -> Result<ExtremaLaw> {
    infimum_law_with(model, r, &LawConfig::default())
}

pub fn supremum_law_with(model: &LevyModel, r: Discount, cfg: &LawConfig) -> Result<ExtremaLaw> {
    if model.monotone_paths() {
        return Err(Error::MonotonePaths(
            "extrema laws are degenerate for monotone paths".into(),
        ));
    }
    if model.spectrally_negative() {
        let rate = phi_right_inverse(model, r)?;
        return Ok(ExtremaLaw {
            side: Side::Supremum,
            kind: LawKind::ExactExponential { rate },
        });
    }
    let dual = model.dual();
    if dual.spectrally_negative() && dual.sigma > 0.0 {
        let law = ScaleFunctionLaw::new(&dual, r)?;
        return Ok(ExtremaLaw {
            side: Side::Supremum,
            kind: LawKind::ScaleFunction(Box::new(law)),
        });
    }
    empirical_law(model, r, Side::Supremum, cfg)
}

pub fn infimum_law_with(model: &LevyModel, r: Discount, cfg: &LawConfig) -> Result<ExtremaLaw> {
    if model.monotone_paths() {
        return Err(Error::MonotonePaths(
            "extrema laws are degenerate for monotone paths".into(),
        ));
    }
    if !model.spectrally_negative() && !model.spectrally_positive() {
        return empirical_law(model, r, Side::Infimum, cfg);
    }
    Ok(supremum_law_with(&model.dual(), r, cfg)?.mirrored())
}

fn empirical_law(model: &LevyModel, r: Discount, side: Side, cfg: &LawConfig) -> Result<ExtremaLaw> {
    if cfg.paths < cfg.min_paths {
        return Err(Error::SimulationBudget(format!(
            "{} paths requested, at least {} required",
            cfg.paths, cfg.min_paths
        )));
    }
    let samples = simulate_extrema(model, r, side, cfg.paths, cfg.step, cfg.seed)?;
    Ok(ExtremaLaw {
        side,
        kind: LawKind::Empirical {
            samples,
            step: cfg.step,
            paths: cfg.paths,
        },
    })
}

/// Sorted Monte Carlo sample of the extremum at `T(r)`, with bridge
/// extrema inside every step.
pub fn simulate_extrema(
    model: &LevyModel,
    r: Discount,
    side: Side,
    paths: usize,
    step: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    let stepper = Stepper::new(model, step)?;
    let track = match side {
        Side::Supremum => Track::Max,
        Side::Infimum => Track::Min,
    };
    let rv = r.value();
    let mut samples = mc::replicate(seed, paths, |rng, _| {
        let out = stepper.run_to_exponential_time(rng, 0.0, rv, track, false);
        match side {
            Side::Supremum => out.max,
            Side::Infimum => out.min,
        }
    });
    samples.sort_by(f64::total_cmp);
    Ok(samples)
}

/// `E[f(x + extremum)]`.
pub fn expected_functional(law: &ExtremaLaw, f: &RealFn, x: f64) -> Result<Estimate> {
    let s = law.side.sign();
    match &law.kind {
        LawKind::ExactExponential { rate } => exponential_functional(*rate, s, f, x),
        LawKind::ScaleFunction(sf) => {
            let rho = sf.tail_rate;
            probe_tail(f, x, s, rho, sf.cutoff())?;
            if let RealFn::Exp { rate, .. } = f {
                if s * rate >= rho {
                    return Err(Error::Integrability(format!(
                        "exp({rate} y) is not integrable against a tail decaying at rate {rho}"
                    )));
                }
            }
            let (v, _) = sf.integrate_density(|y| f.eval(x + s * y));
            Ok(Estimate::exact(v))
        }
        LawKind::Empirical { samples, .. } => {
            let vals: Vec<f64> = samples.iter().map(|e| f.eval(x + e)).collect();
            let (m, se) = mean_and_stderr(&vals);
            if !m.is_finite() {
                return Err(Error::Integrability(
                    "sample mean of the functional is not finite".into(),
                ));
            }
            Ok(Estimate {
                value: m,
                stderr: se,
            })
        }
    }
}

fn probe_tail(f: &RealFn, x: f64, s: f64, rate: f64, at: f64) -> Result<()> {
    let h = |y: f64| f.eval(x + s * y).abs() * (-rate * y).exp();
    let (a, b) = (h(at), h(2.0 * at));
    if !(a.is_finite() && b.is_finite()) || (b > a && b > 1e-300) {
        return Err(Error::Integrability(format!(
            "integrand does not decay: |f| e^(-{rate} y) is {a} at y = {at} and {b} at y = {}",
            2.0 * at
        )));
    }
    Ok(())
}

/// `E[f(x + s U)]` for `U ~ Exp(eta)`.
fn exponential_functional(eta: f64, s: f64, f: &RealFn, x: f64) -> Result<Estimate> {
    let m1 = s / eta;
    let m2 = 2.0 / (eta * eta);
    let v = match *f {
        RealFn::Affine { slope, intercept } => slope * (x + m1) + intercept,
        RealFn::Quadratic { a, b, c } => a * (x * x + 2.0 * x * m1 + m2) + b * (x + m1) + c,
        RealFn::Exp { scale, rate } => {
            let denom = eta - s * rate;
            if denom <= 0.0 {
                return Err(Error::Integrability(format!(
                    "E[exp({rate} X)] diverges against an Exp({eta}) tail"
                )));
            }
            scale * (rate * x).exp() * eta / denom
        }
        RealFn::Custom { .. } => {
            let top = 60.0 / eta;
            probe_tail(f, x, s, eta, top)?;
            let scale = 1.0 / eta;
            let cuts = [0.0, scale, 5.0 * scale, 20.0 * scale, top];
            let mut total = 0.0;
            for w in cuts.windows(2) {
                let (v, _) = integrate(
                    |u| f.eval(x + s * u) * eta * (-eta * u).exp(),
                    w[0],
                    w[1],
                    1e-12,
                    1e-11,
                );
                total += v;
            }
            total
        }
    };
    Ok(Estimate::exact(v))
}

/// Tabulated `r`-scale function of a spectrally negative model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleFunctionTable {
    pub r: f64,
    pub grid: Vec<f64>,
    pub w_values: Vec<f64>,
    /// `Phi(r)`.
    pub phi: f64,
    /// Largest relative transform residual over the test points.
    pub residual: f64,
}

impl ScaleFunctionTable {
    /// `x,W` rows with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,W\n");
        for (x, w) in self.grid.iter().zip(&self.w_values) {
            out.push_str(&format!("{x:.16e},{w:.16e}\n"));
        }
        out
    }
}

/// `W^{(r)}` on `grid_size` uniform points of `[0, x_max]`, by inversion of
/// `1 / (psi(beta) - r)`.
pub fn scale_function(
    model: &LevyModel,
    r: Discount,
    x_max: f64,
    grid_size: usize,
) -> Result<ScaleFunctionTable> {
    if !model.spectrally_negative() {
        return Err(Error::Precondition(
            "scale functions need a model without positive jumps".into(),
        ));
    }
    if model.sigma == 0.0 && model.jumps.is_empty() {
        return Err(Error::Precondition(
            "scale functions need a Gaussian part or jumps".into(),
        ));
    }
    if !(x_max > 0.0) || grid_size < 3 {
        return Err(Error::Config(format!(
            "scale function grid needs x_max > 0 and at least 3 points, got {x_max} and {grid_size}"
        )));
    }
    let phi = phi_right_inverse(model, r)?;
    let rv = r.value();
    let shifted = |s: Complex64| 1.0 / (model.laplace_exponent_complex(s + phi) - rv);
    let h = x_max / (grid_size - 1) as f64;
    let grid: Vec<f64> = (0..grid_size).map(|i| i as f64 * h).collect();
    let w0 = if model.sigma > 0.0 { 0.0 } else { 1.0 / model.drift };
    let mut w_values: Vec<f64> = grid
        .iter()
        .map(|&x| {
            if x == 0.0 {
                w0
            } else {
                (phi * x).exp() * talbot_inverse(shifted, x, TALBOT_NODES)
            }
        })
        .collect();
    // inversion noise can dip below the previous node by a few ulps
    for i in 1..w_values.len() {
        if w_values[i] < w_values[i - 1] {
            let gap = w_values[i - 1] - w_values[i];
            if gap > 1e-9 * w_values[i - 1].abs().max(1e-300) {
                return Err(Error::Inversion(format!(
                    "W decreases at x = {} by {gap}",
                    grid[i]
                )));
            }
            w_values[i] = w_values[i - 1];
        }
    }
    let slope = model.psi_prime(phi)?;
    let mut residual: f64 = 0.0;
    for k in [1.1, 1.5, 2.0, 3.0, 5.0] {
        let beta = k * phi.max(1e-3);
        let vals: Vec<f64> = grid
            .iter()
            .zip(&w_values)
            .map(|(x, w)| (-beta * x).exp() * w)
            .collect();
        let tail = (-(beta - phi) * x_max).exp() / ((beta - phi) * slope);
        let lt = simpson(&vals, h) + tail;
        let exact = 1.0 / (model.psi_unchecked(beta) - rv);
        residual = residual.max(((lt - exact) / exact).abs());
    }
    if residual > 1e-4 {
        return Err(Error::Inversion(format!(
            "transform residual {residual:.3e} exceeds 1e-4; refine the grid or extend x_max"
        )));
    }
    Ok(ScaleFunctionTable {
        r: rv,
        grid,
        w_values,
        phi,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::JumpLaw;

    fn r(v: f64) -> Discount {
        Discount::new(v).unwrap()
    }

    #[test]
    fn brownian_laws_are_exact() {
        let bm = LevyModel::standard_brownian();
        let inf = infimum_law(&bm, r(0.5)).unwrap();
        assert_eq!(inf.side, Side::Infimum);
        assert!((inf.exponential_rate().unwrap() - 1.0).abs() < 1e-11);
        let m = LevyModel::brownian(-0.5, 1.0).unwrap();
        let sup = supremum_law(&m, r(0.5)).unwrap();
        assert!((sup.exponential_rate().unwrap() - (0.5 + 1.25f64.sqrt())).abs() < 1e-11);
    }

    #[test]
    fn exponential_closed_forms() {
        let law = ExtremaLaw {
            side: Side::Infimum,
            kind: LawKind::ExactExponential { rate: 2.0 },
        };
        let e = expected_functional(&law, &RealFn::exp(), 0.0).unwrap();
        assert!((e.value - 2.0 / 3.0).abs() < 1e-15);
        let one = expected_functional(&law, &RealFn::constant(1.0), 0.3).unwrap();
        assert_eq!(one.value, 1.0);
        let id = expected_functional(&law, &RealFn::linear(1.0), 0.0).unwrap();
        assert!((id.value + 0.5).abs() < 1e-15);
        let bad = expected_functional(
            &law,
            &RealFn::Exp {
                scale: 1.0,
                rate: -2.0,
            },
            0.0,
        );
        assert!(matches!(bad, Err(Error::Integrability(_))));
    }

    #[test]
    fn custom_quadrature_matches_closed_form() {
        let law = ExtremaLaw {
            side: Side::Supremum,
            kind: LawKind::ExactExponential { rate: 1.7 },
        };
        let q = RealFn::Quadratic {
            a: 0.3,
            b: -1.0,
            c: 0.2,
        };
        let exact = expected_functional(&law, &q, 0.4).unwrap().value;
        let custom = RealFn::custom("q", move |y| 0.3 * y * y - y + 0.2);
        let num = expected_functional(&law, &custom, 0.4).unwrap().value;
        assert!((exact - num).abs() < 1e-9);
    }

    #[test]
    fn scale_function_law_matches_transform() {
        let m = LevyModel::with_jumps(0.3, 1.0, 2.0, JumpLaw::ExponentialDown { b: 1.5 }).unwrap();
        let law = infimum_law(&m, r(0.7)).unwrap();
        let LawKind::ScaleFunction(sf) = &law.kind else {
            panic!("expected scale-function law")
        };
        // E[e^{c X_inf}] against the transform at real points
        for c in [0.5, 1.0, 2.5] {
            let mc_val = expected_functional(
                &law,
                &RealFn::Exp {
                    scale: 1.0,
                    rate: c,
                },
                0.0,
            )
            .unwrap()
            .value;
            let exact = sf.transform(Complex64::new(c, 0.0)).re;
            assert!((mc_val - exact).abs() < 1e-8, "c = {c}: {mc_val} vs {exact}");
        }
        // mean of -X_inf is 1/Phi - psi'(0)/r
        let mean = -expected_functional(&law, &RealFn::linear(1.0), 0.0).unwrap().value;
        let exact = 1.0 / sf.phi - m.psi_prime(0.0).unwrap() / 0.7;
        assert!((mean - exact).abs() < 1e-8, "{mean} vs {exact}");
    }

    #[test]
    fn two_sided_models_are_empirical() {
        let m = LevyModel::with_jumps(0.0, 1.0, 1.0, JumpLaw::TwoSided { a: 2.0, b: 2.0, p: 0.5 })
            .unwrap();
        let cfg = LawConfig {
            paths: 2_000,
            step: 1e-2,
            seed: 1,
            min_paths: 100,
        };
        let law = supremum_law_with(&m, r(1.0), &cfg).unwrap();
        assert!(law.is_empirical());
        let LawKind::Empirical { samples, .. } = &law.kind else {
            unreachable!()
        };
        assert!(samples.windows(2).all(|w| w[0] <= w[1]));
        assert!(samples[0] >= 0.0);
        let small = LawConfig {
            paths: 10,
            ..cfg
        };
        assert!(matches!(
            supremum_law_with(&m, r(1.0), &small),
            Err(Error::SimulationBudget(_))
        ));
    }

    #[test]
    fn brownian_scale_function() {
        let bm = LevyModel::standard_brownian();
        let t = scale_function(&bm, r(0.5), 12.0, 601).unwrap();
        assert_eq!(t.w_values[0], 0.0);
        for (x, w) in t.grid.iter().zip(&t.w_values) {
            let exact = 2.0 * (x.exp() - (-x).exp()) / 2.0;
            assert!((w - exact).abs() <= 1e-8 * exact.max(1.0), "x = {x}");
        }
    }
}
