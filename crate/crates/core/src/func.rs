//! Real-valued function handles with closed forms for the common shapes.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A function `R -> R`. The structured variants allow exact expectations
/// against exponential laws; `Custom` falls back to quadrature.
#[derive(Clone)]
pub enum RealFn {
    /// `slope * y + intercept`
    Affine { slope: f64, intercept: f64 },
    /// `scale * exp(rate * y)`
    Exp { scale: f64, rate: f64 },
    /// `a * y^2 + b * y + c`
    Quadratic { a: f64, b: f64, c: f64 },
    Custom {
        name: String,
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for RealFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RealFn::Affine { slope, intercept } => {
                write!(f, "Affine({slope} * y + {intercept})")
            }
            RealFn::Exp { scale, rate } => write!(f, "Exp({scale} * exp({rate} * y))"),
            RealFn::Quadratic { a, b, c } => write!(f, "Quadratic({a} y^2 + {b} y + {c})"),
            RealFn::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

impl RealFn {
    pub fn constant(value: f64) -> Self {
        RealFn::Affine {
            slope: 0.0,
            intercept: value,
        }
    }

    pub fn linear(slope: f64) -> Self {
        RealFn::Affine {
            slope,
            intercept: 0.0,
        }
    }

    pub fn exp() -> Self {
        RealFn::Exp {
            scale: 1.0,
            rate: 1.0,
        }
    }

    pub fn custom<F>(name: &str, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        RealFn::Custom {
            name: name.to_string(),
            f: Arc::new(f),
        }
    }

    #[inline]
    pub fn eval(&self, y: f64) -> f64 {
        match self {
            RealFn::Affine { slope, intercept } => slope * y + intercept,
            RealFn::Exp { scale, rate } => scale * (rate * y).exp(),
            RealFn::Quadratic { a, b, c } => (a * y + b) * y + c,
            RealFn::Custom { f, .. } => f(y),
        }
    }

    /// Derivative, available for the structured variants.
    pub fn derivative(&self) -> Option<RealFn> {
        match *self {
            RealFn::Affine { slope, .. } => Some(RealFn::constant(slope)),
            RealFn::Exp { scale, rate } => Some(RealFn::Exp {
                scale: scale * rate,
                rate,
            }),
            RealFn::Quadratic { a, b, .. } => Some(RealFn::Affine {
                slope: 2.0 * a,
                intercept: b,
            }),
            RealFn::Custom { .. } => None,
        }
    }

    /// `y -> scale * self(y)`.
    pub fn scaled(&self, scale: f64) -> RealFn {
        match self {
            RealFn::Affine { slope, intercept } => RealFn::Affine {
                slope: slope * scale,
                intercept: intercept * scale,
            },
            RealFn::Exp { scale: s, rate } => RealFn::Exp {
                scale: s * scale,
                rate: *rate,
            },
            RealFn::Quadratic { a, b, c } => RealFn::Quadratic {
                a: a * scale,
                b: b * scale,
                c: c * scale,
            },
            RealFn::Custom { name, f } => {
                let f = f.clone();
                RealFn::Custom {
                    name: format!("{scale} * {name}"),
                    f: Arc::new(move |y| scale * f(y)),
                }
            }
        }
    }

    /// Polynomial degree when the function is a polynomial.
    pub fn polynomial_degree(&self) -> Option<u32> {
        match *self {
            RealFn::Affine { slope, .. } => Some(if slope == 0.0 { 0 } else { 1 }),
            RealFn::Quadratic { a, .. } => Some(if a == 0.0 { 1 } else { 2 }),
            _ => None,
        }
    }

    /// Coefficients `[c0, c1, c2]` of a polynomial variant.
    pub fn polynomial_coefficients(&self) -> Option<[f64; 3]> {
        match *self {
            RealFn::Affine { slope, intercept } => Some([intercept, slope, 0.0]),
            RealFn::Quadratic { a, b, c } => Some([c, b, a]),
            _ => None,
        }
    }

    /// Parses `kind:key=value,...` specs such as `linear:a=0.5,b=0`,
    /// `exp:k=1,c=1`, `quadratic:a=0.5,b=0,c=0` or `const:c0=1`.
    pub fn parse(spec: &str) -> Result<RealFn> {
        let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
        let params = parse_params(rest)?;
        let get = |key: &str, default: Option<f64>| -> Result<f64> {
            match params.iter().find(|(k, _)| k == key) {
                Some((_, v)) => Ok(*v),
                None => default.ok_or_else(|| {
                    Error::Parse(format!("function `{kind}` needs parameter `{key}`"))
                }),
            }
        };
        let allowed: &[&str] = match kind.trim() {
            "linear" | "affine" => &["a", "b"],
            "exp" => &["k", "c"],
            "quadratic" => &["a", "b", "c"],
            "const" | "constant" => &["c0"],
            other => return Err(Error::Parse(format!("unknown function kind `{other}`"))),
        };
        if let Some((k, _)) = params.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            return Err(Error::Parse(format!(
                "unknown parameter `{k}` for function `{kind}`"
            )));
        }
        Ok(match kind.trim() {
            "linear" | "affine" => RealFn::Affine {
                slope: get("a", None)?,
                intercept: get("b", Some(0.0))?,
            },
            "exp" => RealFn::Exp {
                scale: get("k", Some(1.0))?,
                rate: get("c", Some(1.0))?,
            },
            "quadratic" => RealFn::Quadratic {
                a: get("a", None)?,
                b: get("b", Some(0.0))?,
                c: get("c", Some(0.0))?,
            },
            _ => RealFn::constant(get("c0", None)?),
        })
    }
}

pub(crate) fn parse_params(text: &str) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got `{item}`")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("`{}` is not a number in `{item}`", v.trim())))?;
        out.push((k.trim().to_string(), v));
    }
    Ok(out)
}
