//! Lattice Markov chain approximating one time step of a Lévy model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy::{JumpLaw, LevyModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Values beyond the edge come from an analytic asymptote.
    Absorbing,
    /// Moves beyond the edge stay at the edge node.
    Reflecting,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub x_lo: f64,
    pub x_hi: f64,
    pub nodes: usize,
    pub dt: f64,
    pub lower: Boundary,
    pub upper: Boundary,
}

impl LatticeSpec {
    pub fn new(x_lo: f64, x_hi: f64, nodes: usize, dt: f64) -> Result<Self> {
        let s = LatticeSpec {
            x_lo,
            x_hi,
            nodes,
            dt,
            lower: Boundary::Absorbing,
            upper: Boundary::Absorbing,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_lo < self.x_hi) {
            return Err(Error::Config(format!(
                "lattice needs x_lo < x_hi, got [{}, {}]",
                self.x_lo, self.x_hi
            )));
        }
        if self.nodes < 51 {
            return Err(Error::Config(format!("lattice needs at least 51 nodes, got {}", self.nodes)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("lattice time step must be positive, got {}", self.dt)));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        (self.x_hi - self.x_lo) / (self.nodes - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.x_lo + i as f64 * self.spacing()
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.nodes).map(|i| self.node(i)).collect()
    }

    /// Same spacing, widened by `extra` nodes on each side.
    pub fn widened(&self, extra: usize) -> LatticeSpec {
        let h = self.spacing();
        LatticeSpec {
            x_lo: self.x_lo - extra as f64 * h,
            x_hi: self.x_hi + extra as f64 * h,
            nodes: self.nodes + 2 * extra,
            ..*self
        }
    }
}

/// Sparse transition row shared by all nodes: `(offset in cells, prob)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub moves: Vec<(isize, f64)>,
}

impl Chain {
    /// Mean and variance of one transition, in state units.
    pub fn moments(&self, h: f64) -> (f64, f64) {
        let m: f64 = self.moves.iter().map(|&(o, p)| p * o as f64 * h).sum();
        let s: f64 = self.moves.iter().map(|&(o, p)| p * (o as f64 * h).powi(2)).sum();
        (m, s - m * m)
    }

    pub fn max_reach(&self) -> usize {
        self.moves.iter().map(|&(o, _)| o.unsigned_abs()).max().unwrap_or(0)
    }
}

/// Probability mass of `n` jumps of all components, on the lattice.
fn jump_distribution(model: &LevyModel, dt: f64, h: f64) -> Vec<(isize, f64)> {
    let mut dist: Vec<(isize, f64)> = vec![(0, 1.0)];
    for comp in &model.jumps {
        let lam = comp.rate * dt;
        // single jump size on the lattice, split linearly between neighbours
        let mut single: Vec<(isize, f64)> = Vec::new();
        let mut push = |x: f64, w: f64| {
            let f = (x / h).floor();
            let t = x / h - f;
            single.push((f as isize, w * (1.0 - t)));
            single.push((f as isize + 1, w * t));
        };
        match comp.law {
            JumpLaw::PointMass { size } => push(size, 1.0),
            JumpLaw::ExponentialUp { a } => quantize_exp(a, 1.0, h, &mut push),
            JumpLaw::ExponentialDown { b } => quantize_exp(b, -1.0, h, &mut push),
            JumpLaw::TwoSided { a, b, p } => {
                quantize_exp(a, p, h, &mut |x, w| push(x, w));
                quantize_exp(b, -(1.0 - p), h, &mut |x, w| push(x, w));
            }
        }
        let single = merge(single);
        // Poisson(lam) jump count, truncated at 3 and renormalised
        let pk: Vec<f64> = {
            let mut v = vec![(-lam).exp()];
            for k in 1..=3 {
                v.push(v[k - 1] * lam / k as f64);
            }
            let s: f64 = v.iter().sum();
            v.into_iter().map(|p| p / s).collect()
        };
        let mut comp_dist: Vec<(isize, f64)> = vec![(0, pk[0])];
        let mut power = vec![(0isize, 1.0)];
        for p in pk.iter().skip(1) {
            power = merge(convolve(&power, &single));
            comp_dist.extend(power.iter().map(|&(o, q)| (o, q * p)));
        }
        dist = merge(convolve(&dist, &merge(comp_dist)));
    }
    dist
}

/// Exponential(rate) jump of total mass `|weight|` and sign of `weight`,
/// cut into slices of width about `h`, each placed at its conditional mean.
fn quantize_exp(rate: f64, weight: f64, h: f64, push: &mut dyn FnMut(f64, f64)) {
    let sign = weight.signum();
    let w = weight.abs();
    let slices = ((40.0 / rate) / h).ceil().max(8.0) as usize;
    let width = 40.0 / rate / slices as f64;
    for s in 0..slices {
        let (a, b) = (s as f64 * width, (s + 1) as f64 * width);
        let mass = (-rate * a).exp() - (-rate * b).exp();
        // conditional mean of the slice
        let mean = (a * (-rate * a).exp() - b * (-rate * b).exp()) / mass + 1.0 / rate;
        push(sign * mean, w * mass);
    }
}

fn convolve(a: &[(isize, f64)], b: &[(isize, f64)]) -> Vec<(isize, f64)> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &(oa, pa) in a {
        for &(ob, pb) in b {
            out.push((oa + ob, pa * pb));
        }
    }
    out
}

fn merge(mut v: Vec<(isize, f64)>) -> Vec<(isize, f64)> {
    v.sort_by_key(|&(o, _)| o);
    let mut out: Vec<(isize, f64)> = Vec::with_capacity(v.len());
    for (o, p) in v {
        if p == 0.0 {
            continue;
        }
        match out.last_mut() {
            Some(last) if last.0 == o => last.1 += p,
            _ => out.push((o, p)),
        }
    }
    out
}

/// Chain whose one-step mean and variance equal those of `X_dt`: an exactly
/// moment-matched trinomial for the continuous part, convolved with the
/// quantised compound-Poisson part whose moments it compensates.
pub fn build_chain(model: &LevyModel, spec: &LatticeSpec) -> Result<Chain> {
    spec.validate()?;
    let h = spec.spacing();
    let dt = spec.dt;
    let (mu1, var1) = model.unit_moments();
    let jumps = jump_distribution(model, dt, h);
    let jm: f64 = jumps.iter().map(|&(o, p)| p * o as f64 * h).sum();
    let js: f64 = jumps.iter().map(|&(o, p)| p * (o as f64 * h).powi(2)).sum();
    let jv = js - jm * jm;
    let m = mu1 * dt - jm;
    let v = var1 * dt - jv;
    if v < -1e-14 {
        return Err(Error::Config(format!(
            "lattice spacing {h} is too coarse for the jump part (variance deficit {v:.3e})"
        )));
    }
    let v = v.max(0.0);
    let second = v + m * m;
    let mut k = 1usize;
    while (k as f64 * h).powi(2) < second {
        k += 1;
    }
    let kh = k as f64 * h;
    let s = second / (kh * kh);
    let d = m / kh;
    let (pu, pd) = (0.5 * (s + d), 0.5 * (s - d));
    if pd < -1e-15 || pu < -1e-15 {
        return Err(Error::Config(format!(
            "drift {m} per step cannot be matched on spacing {h}; refine the time step"
        )));
    }
    let k = k as isize;
    let tri = vec![(-k, pd.max(0.0)), (0, 1.0 - s), (k, pu.max(0.0))];
    let chain = Chain {
        moves: merge(convolve(&tri, &jumps)),
    };
    let (cm, cv) = chain.moments(h);
    let scale = (mu1 * dt).abs().max(var1 * dt).max(1e-300);
    if (cm - mu1 * dt).abs() > 1e-10 * scale.max(1.0) || (cv - var1 * dt).abs() > 1e-10 * scale.max(1.0) {
        return Err(Error::Convergence(format!(
            "lattice moments ({cm:.6e}, {cv:.6e}) differ from ({:.6e}, {:.6e})",
            mu1 * dt,
            var1 * dt
        )));
    }
    Ok(chain)
}

/// Applies the chain: `out[i] = sum_o p_o v[i + o]`, with `ghost(j)` giving
/// values at out-of-range indices (`j` may be negative).
pub(crate) fn apply<G: Fn(isize) -> f64>(chain: &Chain, v: &[f64], ghost: &G, out: &mut [f64]) {
    let n = v.len() as isize;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for &(off, p) in &chain.moves {
            let j = i as isize + off;
            let val = if j >= 0 && j < n { v[j as usize] } else { ghost(j) };
            acc += p * val;
        }
        *o = acc;
    }
}
