//! Small numerical toolkit: bracketing root search, adaptive quadrature,
//! Laplace inversion on a Talbot contour, isotonic regression and a few
//! summary statistics.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Bisection on `[lo, hi]`; `f(lo)` and `f(hi)` must have opposite signs
/// (a zero at an endpoint is accepted). Stops when the bracket is shorter
/// than `tol`.
pub fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if !(flo.is_finite() && fhi.is_finite()) || flo.signum() == fhi.signum() {
        return Err(Error::NoRoot(format!(
            "no sign change on [{lo}, {hi}]: f(lo) = {flo}, f(hi) = {fhi}"
        )));
    }
    for _ in 0..400 {
        if (hi - lo).abs() <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Signs of an increasing function at the ends of the widest bracket tried
/// by [`expand_bracket_increasing`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketFailure {
    pub lo: f64,
    pub f_lo: f64,
    pub hi: f64,
    pub f_hi: f64,
}

/// Grows `[center - w, center + w]` by doubling `w` until an increasing
/// function changes sign, or `w` exceeds `limit`.
pub fn expand_bracket_increasing<F>(
    mut f: F,
    center: f64,
    initial: f64,
    limit: f64,
) -> std::result::Result<(f64, f64), BracketFailure>
where
    F: FnMut(f64) -> f64,
{
    let mut w = initial;
    loop {
        let (lo, hi) = (center - w, center + w);
        let (flo, fhi) = (f(lo), f(hi));
        if flo <= 0.0 && fhi >= 0.0 {
            return Ok((lo, hi));
        }
        if w >= limit || !flo.is_finite() || !fhi.is_finite() {
            return Err(BracketFailure {
                lo,
                f_lo: flo,
                hi,
                f_hi: fhi,
            });
        }
        w = (2.0 * w).min(limit);
    }
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_KRONROD_W: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const GK_GAUSS_W: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = GK_KRONROD_W[7] * fc;
    let mut gauss = GK_GAUSS_W[3] * fc;
    for i in 0..7 {
        let dx = h * GK_NODES[i];
        let s = f(c - dx) + f(c + dx);
        kron += GK_KRONROD_W[i] * s;
        if i % 2 == 1 {
            gauss += GK_GAUSS_W[i / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod (7/15) quadrature on a finite interval. Returns
/// the integral and the accumulated error estimate.
pub fn integrate<F>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    if a == b {
        return (0.0, 0.0);
    }
    let (first, first_err) = gk15(&mut f, a, b);
    // max-heap on error, kept as a plain vector: interval counts stay small
    let mut pieces = vec![(a, b, first, first_err)];
    let mut total = first;
    let mut err = first_err;
    let mut evals = 1usize;
    while err > abs_tol.max(rel_tol * total.abs()) && evals < 2000 {
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
        let (lo, hi, val, e) = pieces.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        total += v1 + v2 - val;
        err += e1 + e2 - e;
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
        evals += 1;
    }
    // re-sum to shed accumulated cancellation in the running total
    let total = pieces.iter().map(|p| p.2).sum::<f64>();
    let err = pieces.iter().map(|p| p.3).sum::<f64>();
    (total, err)
}

/// Composite Simpson rule on uniformly spaced samples; an odd number of
/// intervals falls back to a trapezoid on the last one.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let intervals = n - 1;
    let even = intervals - intervals % 2;
    let mut s = 0.0;
    let mut i = 0;
    while i < even {
        s += values[i] + 4.0 * values[i + 1] + values[i + 2];
        i += 2;
    }
    s *= h / 3.0;
    if even < intervals {
        s += 0.5 * h * (values[n - 2] + values[n - 1]);
    }
    s
}

/// Inverse Laplace transform at `t > 0` on the fixed Talbot contour with
/// `m` nodes. The transform must be analytic to the right of the contour.
pub fn talbot_inverse<F>(transform: F, t: f64, m: usize) -> f64
where
    F: Fn(Complex64) -> Complex64,
{
    let m = m.max(4);
    let rad = 2.0 * m as f64 / (5.0 * t);
    let mut acc = 0.5 * (transform(Complex64::new(rad, 0.0)) * (rad * t).exp()).re;
    for k in 1..m {
        let theta = k as f64 * std::f64::consts::PI / m as f64;
        let cot = theta.cos() / theta.sin();
        let s = Complex64::new(rad * theta * cot, rad * theta);
        let sigma = theta + (theta * cot - 1.0) * cot;
        let term = (s * t).exp() * transform(s) * Complex64::new(1.0, sigma);
        acc += term.re;
    }
    acc * rad / m as f64
}

/// Pool-adjacent-violators projection onto nondecreasing sequences with
/// unit weights.
pub fn isotonic_increasing(values: &[f64]) -> Vec<f64> {
    // blocks of (sum, count)
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(values.len());
    for &v in values {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let n = blocks.len();
            let (s1, c1) = blocks[n - 2];
            let (s2, c2) = blocks[n - 1];
            if s1 / c1 as f64 > s2 / c2 as f64 {
                blocks.truncate(n - 2);
                blocks.push((s1 + s2, c1 + c2));
            } else {
                break;
            }
        }
    }
    let mut out = Vec::with_capacity(values.len());
    for (s, c) in blocks {
        out.extend(std::iter::repeat_n(s / c as f64, c));
    }
    out
}

/// Pairwise (cascade) summation; order-fixed, so results do not depend on
/// how the inputs were produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Sample mean and standard error of the mean.
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(xs) / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&dev) / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Kolmogorov–Smirnov distance between a sorted sample and a continuous cdf.
pub fn ks_distance<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Two-sample Kolmogorov–Smirnov distance between sorted samples.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}
