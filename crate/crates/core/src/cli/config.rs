//! Model files and run configurations (TOML).
//!
//! A model file holds `drift`, `sigma` and zero or more jump components:
//!
//! ```toml
//! drift = -0.5
//! sigma = 1.0
//! [[jump]]
//! kind = "exp_down"
//! rate = 2.0
//! b = 3.0
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::func::parse_params;
use crate::gittins::Direction;
use crate::levy::{JumpComponent, JumpLaw, LevyModel};
use crate::mc::SimConfig;
use crate::oracle::LatticeSpec;
use crate::wiener_hopf::Side;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    #[serde(default)]
    drift: f64,
    #[serde(default)]
    sigma: f64,
    #[serde(default)]
    jump: Option<toml::Value>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawJump {
    kind: String,
    rate: Option<f64>,
    a: Option<f64>,
    b: Option<f64>,
    p: Option<f64>,
    size: Option<f64>,
}

fn need(v: Option<f64>, key: &str, kind: &str) -> Result<f64> {
    v.ok_or_else(|| Error::Parse(format!("missing key `jump.{key}` (required for kind = \"{kind}\")")))
}

fn jump_from_raw(j: RawJump) -> Result<JumpComponent> {
    let kind = j.kind.as_str();
    let rate = need(j.rate, "rate", kind)?;
    let law = match kind {
        "exp_up" => JumpLaw::ExponentialUp {
            a: need(j.a, "a", kind)?,
        },
        "exp_down" => JumpLaw::ExponentialDown {
            b: need(j.b, "b", kind)?,
        },
        "two_sided" => JumpLaw::TwoSided {
            a: need(j.a, "a", kind)?,
            b: need(j.b, "b", kind)?,
            p: need(j.p, "p", kind)?,
        },
        "point" => JumpLaw::PointMass {
            size: need(j.size, "size", kind)?,
        },
        other => {
            return Err(Error::Parse(format!(
                "unknown `jump.kind` \"{other}\" (expected exp_up, exp_down, two_sided or point)"
            )))
        }
    };
    let used: &[&str] = match kind {
        "exp_up" => &["a"],
        "exp_down" => &["b"],
        "two_sided" => &["a", "b", "p"],
        _ => &["size"],
    };
    for (key, val) in [("a", j.a), ("b", j.b), ("p", j.p), ("size", j.size)] {
        if val.is_some() && !used.contains(&key) {
            return Err(Error::Parse(format!(
                "key `jump.{key}` does not apply to kind = \"{kind}\""
            )));
        }
    }
    Ok(JumpComponent { rate, law })
}

fn model_from_value(value: toml::Value) -> Result<LevyModel> {
    let raw: RawModel = value
        .try_into()
        .map_err(|e: toml::de::Error| Error::Parse(format!("model: {}", e.message())))?;
    let jumps = match raw.jump {
        None => Vec::new(),
        Some(toml::Value::Array(items)) => items
            .into_iter()
            .map(|v| {
                v.try_into::<RawJump>()
                    .map_err(|e| Error::Parse(format!("jump: {}", e.message())))
                    .and_then(jump_from_raw)
            })
            .collect::<Result<_>>()?,
        Some(v @ toml::Value::Table(_)) => vec![v
            .try_into::<RawJump>()
            .map_err(|e| Error::Parse(format!("jump: {}", e.message())))
            .and_then(jump_from_raw)?],
        Some(_) => return Err(Error::Parse("`jump` must be a table or an array of tables".into())),
    };
    LevyModel::new(raw.drift, raw.sigma, jumps).map_err(|e| Error::Parse(format!("model: {e}")))
}

/// Parses model TOML text.
pub fn parse_model(text: &str) -> Result<LevyModel> {
    let value: toml::Table = toml::from_str(text).map_err(|e| Error::Parse(toml_error(&e, text)))?;
    model_from_value(toml::Value::Table(value))
}

/// `bm:drift=..,sigma=..` inline models, or a path to a model file.
pub fn load_model(spec: &str, base: &Path) -> Result<LevyModel> {
    if let Some(rest) = spec.strip_prefix("bm:") {
        let params = parse_params(rest)?;
        let mut drift = 0.0;
        let mut sigma = 1.0;
        for (k, v) in params {
            match k.as_str() {
                "drift" => drift = v,
                "sigma" => sigma = v,
                other => return Err(Error::Parse(format!("unknown inline model key `{other}`"))),
            }
        }
        return LevyModel::brownian(drift, sigma).map_err(|e| Error::Parse(format!("model: {e}")));
    }
    let path = base.join(spec);
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Error::Parse(format!("cannot read model file {}: {e}", path.display())))?;
    parse_model(&text)
}

fn toml_error(e: &toml::de::Error, text: &str) -> String {
    match e.span() {
        Some(span) => {
            let line = text[..span.start].matches('\n').count() + 1;
            format!("line {line}: {}", e.message())
        }
        None => e.message().to_string(),
    }
}

/// `lo:hi:n` grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn parse(text: &str) -> Result<GridSpec> {
        let parts: Vec<&str> = text.split(':').collect();
        let bad = || Error::Parse(format!("expected lo:hi:n, got `{text}`"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
        if !(lo <= hi) || n == 0 || (n == 1 && lo != hi) {
            return Err(Error::Parse(format!("grid `{text}` needs lo <= hi and n >= 2")));
        }
        Ok(GridSpec { lo, hi, n })
    }

    pub fn points(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        let h = (self.hi - self.lo) / (self.n - 1) as f64;
        (0..self.n)
            .map(|i| if i == self.n - 1 { self.hi } else { self.lo + i as f64 * h })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeBlock {
    pub x_lo: f64,
    pub x_hi: f64,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    #[serde(default = "default_lattice_dt")]
    pub dt: f64,
}

fn default_nodes() -> usize {
    401
}

fn default_lattice_dt() -> f64 {
    1e-3
}

impl LatticeBlock {
    pub fn spec(&self) -> Result<LatticeSpec> {
        LatticeSpec::new(self.x_lo, self.x_hi, self.nodes, self.dt)
    }
}

fn default_verify_step() -> f64 {
    1e-2
}

fn default_scale_points() -> usize {
    201
}

fn default_true() -> bool {
    true
}

fn default_inner_reps() -> usize {
    200
}

fn default_verify_horizon() -> f64 {
    5.0
}

/// The computation to run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemConfig {
    Psi {
        c: Vec<f64>,
    },
    Phi {},
    Extrema {
        side: Side,
        /// Simulated extrema to compare with the law (KS distance).
        #[serde(default)]
        ks_paths: Option<usize>,
        /// Tabulate the scale function on `[0, scale_x_max]` instead (CSV).
        #[serde(default)]
        scale_x_max: Option<f64>,
        #[serde(default = "default_scale_points")]
        scale_points: usize,
    },
    Kappa {
        payoff: String,
        #[serde(default)]
        direction: Option<Direction>,
        x: String,
    },
    Stop {
        payoff: String,
        c: f64,
        x: f64,
        #[serde(default)]
        repr: bool,
    },
    Put {
        strike: f64,
        x: f64,
    },
    Follower {
        cost: String,
        #[serde(rename = "K")]
        k: f64,
        #[serde(default)]
        x0: f64,
        #[serde(default)]
        verify: bool,
        #[serde(default = "default_inner_reps")]
        inner_reps: usize,
        #[serde(default = "default_verify_horizon")]
        verify_horizon: f64,
        /// Grid of the verification path and of the inner simulations.
        #[serde(default = "default_verify_step")]
        verify_step: f64,
    },
    Invest {
        cobb: String,
        #[serde(rename = "K")]
        k: f64,
        #[serde(default)]
        x: Option<String>,
        #[serde(default)]
        evaluate: bool,
        #[serde(default)]
        x0: f64,
    },
    EsscherInvest {
        model_y: String,
        alpha: f64,
    },
    OracleStop {
        payoff: String,
        c: f64,
        lattice: LatticeBlock,
    },
    OracleFollower {
        cost: String,
        #[serde(rename = "K")]
        k: f64,
        lattice: LatticeBlock,
    },
    Compare {
        cost: String,
        #[serde(rename = "K")]
        k: f64,
        strategies: Vec<String>,
        #[serde(default = "default_true")]
        crn: bool,
        #[serde(default)]
        x0: f64,
    },
}

impl ProblemConfig {
    /// Format used when the output block names none.
    pub fn default_format(&self) -> Format {
        match self {
            ProblemConfig::Kappa { .. }
            | ProblemConfig::OracleStop { .. }
            | ProblemConfig::OracleFollower { .. } => Format::Csv,
            ProblemConfig::Extrema { scale_x_max: Some(_), .. } => Format::Csv,
            _ => Format::Json,
        }
    }

    fn supports_csv(&self) -> bool {
        matches!(
            self,
            ProblemConfig::Psi { .. }
                | ProblemConfig::Kappa { .. }
                | ProblemConfig::OracleStop { .. }
                | ProblemConfig::OracleFollower { .. }
                | ProblemConfig::Extrema { scale_x_max: Some(_), .. }
        )
    }

    pub fn command(&self) -> &'static str {
        match self {
            ProblemConfig::Psi { .. } => "psi",
            ProblemConfig::Phi {} => "phi",
            ProblemConfig::Extrema { .. } => "extrema",
            ProblemConfig::Kappa { .. } => "kappa",
            ProblemConfig::Stop { .. } => "stop",
            ProblemConfig::Put { .. } => "put",
            ProblemConfig::Follower { .. } => "follower",
            ProblemConfig::Invest { .. } => "invest",
            ProblemConfig::EsscherInvest { .. } => "esscher-invest",
            ProblemConfig::OracleStop { .. } => "oracle-stop",
            ProblemConfig::OracleFollower { .. } => "oracle-follower",
            ProblemConfig::Compare { .. } => "compare",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default)]
    pub path: Option<String>,
    #[serde(default)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimBlock {
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default)]
    pub seed: u64,
    /// Fixed horizon; omitted means chosen from the discounted-tail bound.
    #[serde(default)]
    pub horizon: Option<f64>,
}

fn default_reps() -> usize {
    10_000
}

fn default_step() -> f64 {
    1e-3
}

impl Default for SimBlock {
    fn default() -> Self {
        SimBlock {
            reps: default_reps(),
            step: default_step(),
            seed: 0,
            horizon: None,
        }
    }
}

impl SimBlock {
    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            reps: self.reps,
            step: self.step,
            seed: self.seed,
            horizon: self.horizon,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRunConfig {
    model: toml::Value,
    #[serde(default)]
    r: Option<f64>,
    problem: ProblemConfig,
    #[serde(default)]
    sim: SimBlock,
    #[serde(default)]
    output: OutputBlock,
}

/// Fully resolved run: the model is loaded and every default is explicit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    /// Where the model came from (file path or inline spec), if anywhere.
    pub model_source: Option<String>,
    pub model: LevyModel,
    pub r: Option<f64>,
    pub problem: ProblemConfig,
    pub sim: SimBlock,
    pub output: OutputBlock,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn needs_rate(p: &ProblemConfig) -> bool {
    !matches!(p, ProblemConfig::Psi { .. })
}

impl RunConfig {
    /// Fills in the output format so the echoed configuration is complete.
    pub fn resolve_defaults(&mut self) {
        if self.output.format.is_none() {
            self.output.format = Some(self.problem.default_format());
        }
    }

    /// Checks every numeric field against the preconditions of the
    /// operation it feeds.
    pub fn validate(&self) -> Result<()> {
        match self.r {
            Some(r) if !(r > 0.0 && r.is_finite()) => {
                return Err(Error::Parse(format!("key `r`: r > 0 required, got {r}")));
            }
            None if needs_rate(&self.problem) => {
                return Err(Error::Parse(format!(
                    "key `r` is required for `{}` (r > 0)",
                    self.problem.command()
                )));
            }
            _ => {}
        }
        if self.output.format == Some(Format::Csv) && !self.problem.supports_csv() {
            return Err(Error::Parse(format!(
                "key `output.format`: `{}` reports are JSON only",
                self.problem.command()
            )));
        }
        let s = &self.sim;
        if s.reps < 2 {
            return Err(Error::Parse(format!("key `sim.reps`: reps >= 2 required, got {}", s.reps)));
        }
        if !(s.step > 0.0 && s.step.is_finite()) {
            return Err(Error::Parse(format!("key `sim.step`: step > 0 required, got {}", s.step)));
        }
        if let Some(h) = s.horizon {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::Parse(format!("key `sim.horizon`: horizon > 0 required, got {h}")));
            }
        }
        match &self.problem {
            ProblemConfig::Kappa { x, payoff, .. } => {
                GridSpec::parse(x)?;
                crate::func::RealFn::parse(payoff)?;
            }
            ProblemConfig::Stop { payoff, c, x, .. } => {
                crate::func::RealFn::parse(payoff)?;
                finite("problem.c", *c)?;
                finite("problem.x", *x)?;
            }
            ProblemConfig::Put { strike, x } => {
                if !(*strike >= 0.0 && strike.is_finite()) {
                    return Err(Error::Parse(format!(
                        "key `problem.strike`: strike >= 0 required, got {strike}"
                    )));
                }
                finite("problem.x", *x)?;
            }
            ProblemConfig::Follower { k, inner_reps, verify_horizon, verify_step, .. } => {
                if !(*verify_step > 0.0 && *verify_step < *verify_horizon) {
                    return Err(Error::Parse(format!(
                        "key `problem.verify_step`: 0 < verify_step < verify_horizon required, got {verify_step}"
                    )));
                }
                nonneg("problem.K", *k)?;
                if *inner_reps < 4 {
                    return Err(Error::Parse(format!(
                        "key `problem.inner_reps`: inner_reps >= 4 required, got {inner_reps}"
                    )));
                }
                if !(*verify_horizon > 0.0) {
                    return Err(Error::Parse(format!(
                        "key `problem.verify_horizon`: verify_horizon > 0 required, got {verify_horizon}"
                    )));
                }
            }
            ProblemConfig::Invest { k, x, .. } => {
                if !(*k > 0.0 && k.is_finite()) {
                    return Err(Error::Parse(format!("key `problem.K`: K > 0 required, got {k}")));
                }
                if let Some(x) = x {
                    GridSpec::parse(x)?;
                }
            }
            ProblemConfig::EsscherInvest { alpha, .. } => {
                if !(*alpha > 0.0 && *alpha < 1.0) {
                    return Err(Error::Parse(format!(
                        "key `problem.alpha`: 0 < alpha < 1 required, got {alpha}"
                    )));
                }
            }
            ProblemConfig::OracleStop { lattice, payoff, .. } => {
                crate::func::RealFn::parse(payoff)?;
                lattice.spec().map_err(|e| Error::Parse(format!("key `problem.lattice`: {e}")))?;
            }
            ProblemConfig::OracleFollower { lattice, k, .. } => {
                nonneg("problem.K", *k)?;
                lattice.spec().map_err(|e| Error::Parse(format!("key `problem.lattice`: {e}")))?;
            }
            ProblemConfig::Compare { k, strategies, .. } => {
                nonneg("problem.K", *k)?;
                if strategies.is_empty() {
                    return Err(Error::Parse("key `problem.strategies` must not be empty".into()));
                }
            }
            ProblemConfig::Psi { c } => {
                if c.is_empty() {
                    return Err(Error::Parse("key `problem.c` must not be empty".into()));
                }
            }
            ProblemConfig::Phi {} => {}
            ProblemConfig::Extrema { ks_paths, scale_x_max, scale_points, .. } => {
                if let Some(x) = scale_x_max {
                    if !(*x > 0.0 && x.is_finite()) || *scale_points < 3 {
                        return Err(Error::Parse(format!(
                            "keys `problem.scale_x_max`/`scale_points`: x_max > 0 and points >= 3 required, got {x} and {scale_points}"
                        )));
                    }
                }
                if let Some(n) = ks_paths {
                    if *n < 2 {
                        return Err(Error::Parse(format!(
                            "key `problem.ks_paths`: ks_paths >= 2 required, got {n}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

fn finite(key: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Parse(format!("key `{key}` must be finite, got {v}")))
    }
}

fn nonneg(key: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Parse(format!("key `{key}`: {key} >= 0 required, got {v}")))
    }
}

/// Parses and validates a run configuration. Relative model paths are
/// resolved against `base_dir`.
pub fn parse_config_in(text: &str, base_dir: &Path) -> Result<RunConfig> {
    let raw: RawRunConfig = toml::from_str(text).map_err(|e| Error::Parse(toml_error(&e, text)))?;
    let (model_source, model) = match raw.model {
        toml::Value::String(s) => {
            let m = load_model(&s, base_dir)?;
            (Some(s), m)
        }
        v @ toml::Value::Table(_) => (None, model_from_value(v)?),
        _ => return Err(Error::Parse("key `model` must be a path or a table".into())),
    };
    let mut cfg = RunConfig {
        model_source,
        model,
        r: raw.r,
        problem: raw.problem,
        sim: raw.sim,
        output: raw.output,
        base_dir: base_dir.to_path_buf(),
    };
    cfg.resolve_defaults();
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_in(text, Path::new("."))
}
