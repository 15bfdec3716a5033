//! Command-line front end of the `gwh` binary.
//!
//! Every subcommand builds a [`RunConfig`], so `gwh run --config file.toml`
//! and the flag form go through the same validation and dispatch, and every
//! report echoes the resolved configuration.

pub mod config;
pub mod report;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::control::{
    cost_functional, esscher_reduce, follower_control, follower_threshold, subgradient_path,
    verify_first_order, CobbDouglasSpec, ConstantControl, ControlPath, FollowerCostSpec,
    FollowerThreshold, IndexControl, InnerConfig, InvestIndex, Problem, Strategy, Tolerances,
    ZeroControl,
};
use crate::error::{Error, Result};
use crate::func::{parse_params, RealFn};
use crate::gittins::{build_curve, Direction, ExtendedReal, PayoffSpec};
use crate::levy::{phi_right_inverse, simulate_replication, Discount, SamplePath, Track};
use crate::mc::{self, McEstimate};
use crate::numerics::ks_distance;
use crate::oracle::{dp_follower_oracle, dp_stopping_oracle, policy_comparison, ComparisonRow, ComparisonTable};
use crate::stopping::{perpetual_put, stopping_value, stopping_value_repr};
use crate::wiener_hopf::{
    infimum_law_with, scale_function, simulate_extrema, supremum_law_with, LawConfig, Side,
};

pub use config::{
    load_model, parse_config, parse_config_in, parse_model, Format, GridSpec, LatticeBlock,
    OutputBlock, ProblemConfig, RunConfig, SimBlock,
};
pub use report::{write_atomic, Report, SCHEMA_VERSION};

/// Exit code when `--verify` finds a first-order violation.
pub const EXIT_VERIFY_FAIL: i32 = 4;

/// Result of a run before it is written.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Report,
    pub verify_failed: bool,
}

/// `quadratic:k=..` gives `c(y) = k y^2 / 2`; any other spec is a function
/// understood by [`RealFn::parse`] whose derivative is taken symbolically.
pub fn parse_cost(spec: &str, k: f64) -> Result<FollowerCostSpec> {
    if let Some(rest) = spec.strip_prefix("quadratic:") {
        if let [(key, scale)] = parse_params(rest)?.as_slice() {
            if key == "k" {
                return FollowerCostSpec::quadratic(*scale, k);
            }
        }
    }
    FollowerCostSpec::from_cost(RealFn::parse(spec)?, k)
}

/// `C=..,alpha=..,beta=..`.
pub fn parse_cobb(spec: &str) -> Result<CobbDouglasSpec> {
    let mut c = None;
    let mut alpha = None;
    let mut beta = None;
    for (key, v) in parse_params(spec)? {
        match key.as_str() {
            "C" | "c" => c = Some(v),
            "alpha" => alpha = Some(v),
            "beta" => beta = Some(v),
            other => return Err(Error::Parse(format!("unknown Cobb-Douglas key `{other}`"))),
        }
    }
    let need = |v: Option<f64>, key: &str| {
        v.ok_or_else(|| Error::Parse(format!("Cobb-Douglas spec needs `{key}`")))
    };
    CobbDouglasSpec::new(need(c, "C")?, need(alpha, "alpha")?, need(beta, "beta")?)
}

struct Named<S> {
    name: String,
    inner: S,
}

impl<S: Strategy> Strategy for Named<S> {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn control(&self, path: &SamplePath) -> ControlPath {
        self.inner.control(path)
    }
}

/// `theta_star`, `shift:+d`, `threshold:b`, `zero` or `constant:y`.
pub fn parse_strategy(spec: &str, x_star: f64) -> Result<Box<dyn Strategy>> {
    let spec = spec.trim();
    let num = |s: &str| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("`{s}` is not a number in strategy `{spec}`")))
    };
    let name = spec.to_string();
    Ok(match spec.split_once(':') {
        None if spec == "theta_star" => Box::new(Named {
            name,
            inner: FollowerThreshold { threshold: x_star },
        }),
        None if spec == "zero" => Box::new(ZeroControl),
        Some(("shift", d)) => Box::new(Named {
            name,
            inner: FollowerThreshold {
                threshold: x_star + num(d)?,
            },
        }),
        Some(("threshold", b)) => Box::new(Named {
            name,
            inner: FollowerThreshold { threshold: num(b)? },
        }),
        Some(("constant", y)) => Box::new(Named {
            name,
            inner: ConstantControl { level: num(y)? },
        }),
        _ => {
            return Err(Error::Parse(format!(
                "unknown strategy `{spec}` (expected theta_star, shift:d, threshold:b, zero or constant:y)"
            )))
        }
    })
}

fn rate(cfg: &RunConfig) -> Result<Discount> {
    let r = cfg
        .r
        .ok_or_else(|| Error::Parse("key `r` is required (r > 0)".into()))?;
    Discount::new(r)
}

fn extended(v: ExtendedReal) -> Value {
    match v {
        ExtendedReal::NegInf => json!("-inf"),
        ExtendedReal::PosInf => json!("+inf"),
        ExtendedReal::Finite(x) => json!(x),
    }
}

fn infer_direction(g: &RealFn, grid: &[f64]) -> Direction {
    let lo = g.eval(grid[0]);
    let hi = g.eval(grid[grid.len() - 1]);
    if hi >= lo {
        Direction::Increasing
    } else {
        Direction::Decreasing
    }
}

/// Runs the configured computation.
pub fn execute(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let model = &cfg.model;
    let sim = cfg.sim.sim_config();
    let format = cfg.output.format.unwrap_or(cfg.problem.default_format());
    let csv = format == Format::Csv;
    let mut verify_failed = false;
    let report = match &cfg.problem {
        ProblemConfig::Psi { c } => {
            let values = c
                .iter()
                .map(|&c| Ok((c, model.laplace_exponent(c)?)))
                .collect::<Result<Vec<_>>>()?;
            if csv {
                Report::Csv(report::csv(&["c", "psi"], values.iter().map(|&(c, p)| vec![c, p])))
            } else {
                let rows: Vec<Value> = values.iter().map(|&(c, p)| json!({"c": c, "psi": p})).collect();
                Report::json(cfg, json!({ "values": rows }))?
            }
        }
        ProblemConfig::Phi {} => {
            let r = rate(cfg)?;
            Report::json(cfg, json!({ "phi": phi_right_inverse(model, r)? }))?
        }
        ProblemConfig::Extrema {
            side,
            ks_paths,
            scale_x_max,
            scale_points,
        } => {
            let r = rate(cfg)?;
            if let Some(x_max) = scale_x_max {
                let table = scale_function(model, r, *x_max, *scale_points)?;
                if csv {
                    Report::Csv(table.to_csv())
                } else {
                    Report::json(cfg, json!({ "scale_function": table }))?
                }
            } else {
                let law_cfg = LawConfig {
                    paths: sim.reps,
                    step: sim.step,
                    seed: sim.seed,
                    ..LawConfig::default()
                };
                let law = match side {
                    Side::Supremum => supremum_law_with(model, r, &law_cfg)?,
                    Side::Infimum => infimum_law_with(model, r, &law_cfg)?,
                };
                let mut fields = json!({ "law": law });
                if let Some(n) = ks_paths {
                    let seed = mc::derive_seed(sim.seed, 0x4b53);
                    let samples = simulate_extrema(model, r, *side, *n, sim.step, seed)?;
                    fields["ks"] = json!({
                        "distance": ks_distance(&samples, |v| law.cdf(v)),
                        "paths": n,
                        "seed": seed,
                    });
                }
                Report::json(cfg, fields)?
            }
        }
        ProblemConfig::Kappa { payoff, direction, x } => {
            let r = rate(cfg)?;
            let grid = GridSpec::parse(x)?;
            let g = RealFn::parse(payoff)?;
            let dir = direction.unwrap_or_else(|| infer_direction(&g, &grid.points()));
            let spec = PayoffSpec { g, direction: dir };
            let curve = build_curve(&spec, model, r, grid.lo, grid.hi, grid.n)?;
            if csv {
                Report::Csv(report::csv(
                    &["x", "kappa", "stderr"],
                    (0..curve.grid.len()).map(|i| vec![curve.grid[i], curve.values[i], curve.stderr[i]]),
                ))
            } else {
                Report::json(cfg, json!({ "direction": dir, "curve": curve }))?
            }
        }
        ProblemConfig::Stop { payoff, c, x, repr } => {
            let r = rate(cfg)?;
            let spec = PayoffSpec::increasing(RealFn::parse(payoff)?);
            let res = stopping_value(&spec, model, r, *c, *x, &sim)?;
            let mut fields = json!({
                "value": res.value.mean,
                "stderr": res.value.stderr,
                "threshold": extended(res.threshold),
                "region": res.region,
            });
            if *repr {
                let alt = stopping_value_repr(&spec, model, r, *c, *x, &sim)?;
                fields["representation"] = json!({ "value": alt.mean, "stderr": alt.stderr });
            }
            Report::json(cfg, fields)?
        }
        ProblemConfig::Put { strike, x } => {
            let r = rate(cfg)?;
            let res = perpetual_put(model, r, *strike, *x, &sim)?;
            Report::json(
                cfg,
                json!({
                    "price": res.price.mean,
                    "stderr": res.price.stderr,
                    "threshold": res.threshold,
                    "horizon": res.horizon,
                }),
            )?
        }
        ProblemConfig::Follower {
            cost,
            k,
            x0,
            verify,
            inner_reps,
            verify_horizon,
            verify_step,
        } => {
            let r = rate(cfg)?;
            let spec = parse_cost(cost, *k)?;
            let x_star = follower_threshold(&spec, model, r)?;
            let problem = Problem::Follower(spec.clone());
            let est = cost_functional(&problem, model, &FollowerThreshold { threshold: x_star }, r, *x0, &sim)?;
            let foc = if *verify {
                let seed = mc::derive_seed(sim.seed, 0x464f43);
                let path = simulate_replication(model, *verify_horizon, *verify_step, *x0, seed, 0, Track::Max)?;
                let control = follower_control(&path, x_star);
                let inner = InnerConfig {
                    reps: *inner_reps,
                    step: *verify_step,
                    seed: mc::derive_seed(seed, 1),
                    ..InnerConfig::default()
                };
                let sg = subgradient_path(&spec, model, x_star, r, &path, &control, &inner)?;
                let rep = verify_first_order(&sg, &control, r, &Tolerances::default());
                verify_failed = !rep.pass;
                serde_json::to_value(&rep).map_err(|e| Error::Config(e.to_string()))?
            } else {
                Value::Null
            };
            Report::json(
                cfg,
                json!({
                    "threshold": x_star,
                    "cost": { "mean": est.mean, "stderr": est.stderr, "reps": est.reps },
                    "foc": foc,
                }),
            )?
        }
        ProblemConfig::Invest { cobb, k, x, evaluate, x0 } => {
            let r = rate(cfg)?;
            let cd = parse_cobb(cobb)?;
            let spec = cd.invest_spec(*k)?;
            let delta = cd.delta(model, r, *k)?;
            let gamma = cd.gamma();
            let mut fields = json!({ "delta": delta, "gamma": gamma });
            if let Some(x) = x {
                let index = InvestIndex::new(&spec, model, r)?;
                let rows = GridSpec::parse(x)?
                    .points()
                    .into_iter()
                    .map(|x| Ok(json!({ "x": x, "index": index.eval(x)?, "closed_form": delta * (gamma * x).exp() })))
                    .collect::<Result<Vec<_>>>()?;
                fields["index"] = Value::Array(rows);
            }
            if *evaluate {
                let strategy = IndexControl {
                    name: "index".into(),
                    index: Arc::new(move |x| delta * (gamma * x).exp()),
                };
                let est = cost_functional(&Problem::Invest(spec), model, &strategy, r, *x0, &sim)?;
                fields["payoff"] = json!({ "mean": est.mean, "stderr": est.stderr, "reps": est.reps });
            }
            Report::json(cfg, fields)?
        }
        ProblemConfig::EsscherInvest { model_y, alpha } => {
            let r = rate(cfg)?;
            let y = load_model(model_y, &cfg.base_dir)?;
            let red = esscher_reduce(model, &y, r, *alpha)?;
            Report::json(cfg, json!({ "reduction": red }))?
        }
        ProblemConfig::OracleStop { payoff, c, lattice } => {
            let r = rate(cfg)?;
            let spec = PayoffSpec::increasing(RealFn::parse(payoff)?);
            let o = dp_stopping_oracle(&spec, model, r, *c, &lattice.spec()?)?;
            if csv {
                Report::Csv(report::csv(&["node", "value"], o.grid.iter().zip(&o.values).map(|(&x, &v)| vec![x, v])))
            } else {
                Report::json(cfg, json!({ "oracle": o }))?
            }
        }
        ProblemConfig::OracleFollower { cost, k, lattice } => {
            let r = rate(cfg)?;
            let spec = parse_cost(cost, *k)?;
            let o = dp_follower_oracle(&spec, model, r, &lattice.spec()?)?;
            if csv {
                Report::Csv(report::csv(&["node", "value"], o.grid.iter().zip(&o.values).map(|(&x, &v)| vec![x, v])))
            } else {
                Report::json(cfg, json!({ "oracle": o }))?
            }
        }
        ProblemConfig::Compare {
            cost,
            k,
            strategies,
            crn,
            x0,
        } => {
            let r = rate(cfg)?;
            let spec = parse_cost(cost, *k)?;
            let x_star = follower_threshold(&spec, model, r)?;
            let boxed = strategies
                .iter()
                .map(|s| parse_strategy(s, x_star))
                .collect::<Result<Vec<_>>>()?;
            let refs: Vec<&dyn Strategy> = boxed.iter().map(|b| b.as_ref()).collect();
            let problem = Problem::Follower(spec);
            let table = if *crn {
                policy_comparison(&problem, model, r, &refs, *x0, &sim)?
            } else {
                independent_comparison(&problem, model, r, &refs, *x0, &sim)?
            };
            Report::json(cfg, json!({ "threshold": x_star, "crn": crn, "table": table }))?
        }
    };
    Ok(Outcome {
        report,
        verify_failed,
    })
}

/// Each strategy on its own paths; differences carry the unpaired error.
fn independent_comparison(
    problem: &Problem,
    model: &crate::levy::LevyModel,
    r: Discount,
    strategies: &[&dyn Strategy],
    x0: f64,
    sim: &mc::SimConfig,
) -> Result<ComparisonTable> {
    let costs = strategies
        .iter()
        .enumerate()
        .map(|(j, s)| {
            let own = mc::SimConfig {
                seed: mc::derive_seed(sim.seed, j as u64 + 1),
                ..*sim
            };
            cost_functional(problem, model, *s, r, x0, &own)
        })
        .collect::<Result<Vec<McEstimate>>>()?;
    let base = costs[0];
    let rows = strategies
        .iter()
        .zip(&costs)
        .map(|(s, c)| {
            let se = c.stderr.hypot(base.stderr);
            ComparisonRow {
                name: s.name(),
                cost: *c,
                paired_diff: McEstimate {
                    mean: c.mean - base.mean,
                    stderr: se,
                    reps: c.reps,
                    seed: c.seed,
                },
                unpaired_stderr: se,
            }
        })
        .collect();
    Ok(ComparisonTable {
        horizon: sim.horizon.unwrap_or(f64::NAN),
        x0,
        rows,
    })
}

/// Runs `cfg`, writes its report and returns the process exit code.
/// Diagnostics go to standard error.
pub fn run(cfg: &RunConfig) -> i32 {
    match execute(cfg) {
        Ok(outcome) => {
            let bytes = outcome.report.to_bytes();
            let written = match &cfg.output.path {
                Some(p) => write_atomic(Path::new(p), &bytes),
                None => {
                    use std::io::Write;
                    std::io::stdout().write_all(&bytes).map_err(Error::from)
                }
            };
            if let Err(e) = written {
                eprintln!("gwh: {e}");
                return e.exit_code();
            }
            if outcome.verify_failed {
                eprintln!("gwh: first-order verification FAILED");
                EXIT_VERIFY_FAIL
            } else {
                0
            }
        }
        Err(e) => {
            eprintln!("gwh: {e}");
            e.exit_code()
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "gwh", version, about = "Gittins-index and Wiener-Hopf solvers for Levy control problems")]
pub struct Cli {
    /// Worker threads (GWH_THREADS overrides).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SideArg {
    Sup,
    Inf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DirectionArg {
    Increasing,
    Decreasing,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Model TOML file, or `bm:drift=..,sigma=..`.
    #[arg(long)]
    pub model: String,
}

#[derive(Debug, Args)]
pub struct RateArg {
    #[arg(long, allow_negative_numbers = true)]
    pub r: f64,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[arg(long, default_value_t = 10_000)]
    pub reps: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fixed simulation horizon; chosen from the discounted tail otherwise.
    #[arg(long)]
    pub horizon: Option<f64>,
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Report path; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Debug, Args)]
pub struct LatticeArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub x_lo: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub x_hi: f64,
    #[arg(long, default_value_t = 401)]
    pub nodes: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Laplace exponent at one or more points.
    Psi {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true, allow_negative_numbers = true)]
        c: Vec<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Right inverse of the Laplace exponent.
    Phi {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        r: RateArg,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Law of the supremum or infimum at an exponential time.
    Extrema {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        r: RateArg,
        #[arg(long, value_enum)]
        side: SideArg,
        #[arg(long)]
        ks_paths: Option<usize>,
        /// Tabulate the scale function on [0, x] instead.
        #[arg(long)]
        scale_x_max: Option<f64>,
        #[arg(long, default_value_t = 201)]
        scale_points: usize,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Index function on a grid `lo:hi:n`.
    Kappa {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        r: RateArg,
        #[arg(long)]
        payoff: String,
        #[arg(long, value_enum)]
        direction: Option<DirectionArg>,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Optimal stopping value `v(x, c)`.
    Stop {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        r: RateArg,
        #[arg(long)]
        payoff: String,
        #[arg(long, allow_negative_numbers = true)]
        c: f64,
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
        /// Also report the representation estimator.
        #[arg(long)]
        repr: bool,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Perpetual American put.
    Put {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        r: RateArg,
        #[arg(long)]
        strike: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
        x: f64,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Monotone follower threshold, cost and optional first-order check.
    Follower {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        r: RateArg,
        #[arg(long)]
        cost: String,
        #[arg(long = "K")]
        k: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
        x0: f64,
        #[arg(long)]
        verify: bool,
        #[arg(long, default_value_t = 200)]
        inner_reps: usize,
        #[arg(long, default_value_t = 5.0)]
        verify_horizon: f64,
        #[arg(long, default_value_t = 1e-2)]
        verify_step: f64,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Irreversible investment with a Cobb-Douglas payoff.
    Invest {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        r: RateArg,
        #[arg(long)]
        cobb: String,
        #[arg(long = "K")]
        k: f64,
        #[arg(long, allow_hyphen_values = true)]
        x: Option<String>,
        #[arg(long)]
        evaluate: bool,
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
        x0: f64,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Reduction of the two-factor investment problem.
    EsscherInvest {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        model_y: String,
        #[command(flatten)]
        r: RateArg,
        #[arg(long)]
        alpha: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Lattice value iteration for the stopping problem.
    OracleStop {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        r: RateArg,
        #[arg(long)]
        payoff: String,
        #[arg(long, allow_negative_numbers = true)]
        c: f64,
        #[command(flatten)]
        lattice: LatticeArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Lattice dynamic programming for the follower.
    OracleFollower {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        r: RateArg,
        #[arg(long)]
        cost: String,
        #[arg(long = "K")]
        k: f64,
        #[command(flatten)]
        lattice: LatticeArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Costs of several follower strategies on common paths.
    Compare {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        r: RateArg,
        #[arg(long)]
        cost: String,
        #[arg(long = "K")]
        k: f64,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        strategies: Vec<String>,
        /// Common random numbers across strategies.
        #[arg(long)]
        crn: bool,
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
        x0: f64,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Runs a TOML configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output.path`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl SimArgs {
    fn block(&self) -> SimBlock {
        SimBlock {
            reps: self.reps,
            step: self.step,
            seed: self.seed,
            horizon: self.horizon,
        }
    }
}

impl OutArgs {
    fn block(&self) -> OutputBlock {
        OutputBlock {
            path: self.out.as_ref().map(|p| p.display().to_string()),
            format: self.format.map(|f| match f {
                FormatArg::Json => Format::Json,
                FormatArg::Csv => Format::Csv,
            }),
        }
    }
}

impl LatticeArgs {
    fn block(&self) -> LatticeBlock {
        LatticeBlock {
            x_lo: self.x_lo,
            x_hi: self.x_hi,
            nodes: self.nodes,
            dt: self.dt,
        }
    }
}

/// Turns parsed arguments into a validated configuration.
pub fn config_from_command(command: &Command) -> Result<RunConfig> {
    let base = PathBuf::from(".");
    let build = |model: &ModelArgs, r: Option<f64>, problem: ProblemConfig, sim: Option<&SimArgs>, out: &OutArgs| {
        let mut cfg = RunConfig {
            model_source: Some(model.model.clone()),
            model: load_model(&model.model, &base)?,
            r,
            problem,
            sim: sim.map(SimArgs::block).unwrap_or_default(),
            output: out.block(),
            base_dir: base.clone(),
        };
        cfg.resolve_defaults();
        cfg.validate()?;
        Ok(cfg)
    };
    match command {
        Command::Psi { model, c, out } => build(model, None, ProblemConfig::Psi { c: c.clone() }, None, out),
        Command::Phi { model, r, out } => build(model, Some(r.r), ProblemConfig::Phi {}, None, out),
        Command::Extrema {
            model,
            r,
            side,
            ks_paths,
            scale_x_max,
            scale_points,
            sim,
            out,
        } => build(
            model,
            Some(r.r),
            ProblemConfig::Extrema {
                side: match side {
                    SideArg::Sup => Side::Supremum,
                    SideArg::Inf => Side::Infimum,
                },
                ks_paths: *ks_paths,
                scale_x_max: *scale_x_max,
                scale_points: *scale_points,
            },
            Some(sim),
            out,
        ),
        Command::Kappa {
            model,
            r,
            payoff,
            direction,
            x,
            out,
        } => build(
            model,
            Some(r.r),
            ProblemConfig::Kappa {
                payoff: payoff.clone(),
                direction: direction.map(|d| match d {
                    DirectionArg::Increasing => Direction::Increasing,
                    DirectionArg::Decreasing => Direction::Decreasing,
                }),
                x: x.clone(),
            },
            None,
            out,
        ),
        Command::Stop {
            model,
            r,
            payoff,
            c,
            x,
            repr,
            sim,
            out,
        } => build(
            model,
            Some(r.r),
            ProblemConfig::Stop {
                payoff: payoff.clone(),
                c: *c,
                x: *x,
                repr: *repr,
            },
            Some(sim),
            out,
        ),
        Command::Put {
            model,
            r,
            strike,
            x,
            sim,
            out,
        } => build(model, Some(r.r), ProblemConfig::Put { strike: *strike, x: *x }, Some(sim), out),
        Command::Follower {
            model,
            r,
            cost,
            k,
            x0,
            verify,
            inner_reps,
            verify_horizon,
            verify_step,
            sim,
            out,
        } => build(
            model,
            Some(r.r),
            ProblemConfig::Follower {
                cost: cost.clone(),
                k: *k,
                x0: *x0,
                verify: *verify,
                inner_reps: *inner_reps,
                verify_horizon: *verify_horizon,
                verify_step: *verify_step,
            },
            Some(sim),
            out,
        ),
        Command::Invest {
            model,
            r,
            cobb,
            k,
            x,
            evaluate,
            x0,
            sim,
            out,
        } => build(
            model,
            Some(r.r),
            ProblemConfig::Invest {
                cobb: cobb.clone(),
                k: *k,
                x: x.clone(),
                evaluate: *evaluate,
                x0: *x0,
            },
            Some(sim),
            out,
        ),
        Command::EsscherInvest {
            model,
            model_y,
            r,
            alpha,
            out,
        } => build(
            model,
            Some(r.r),
            ProblemConfig::EsscherInvest {
                model_y: model_y.clone(),
                alpha: *alpha,
            },
            None,
            out,
        ),
        Command::OracleStop {
            model,
            r,
            payoff,
            c,
            lattice,
            out,
        } => build(
            model,
            Some(r.r),
            ProblemConfig::OracleStop {
                payoff: payoff.clone(),
                c: *c,
                lattice: lattice.block(),
            },
            None,
            out,
        ),
        Command::OracleFollower {
            model,
            r,
            cost,
            k,
            lattice,
            out,
        } => build(
            model,
            Some(r.r),
            ProblemConfig::OracleFollower {
                cost: cost.clone(),
                k: *k,
                lattice: lattice.block(),
            },
            None,
            out,
        ),
        Command::Compare {
            model,
            r,
            cost,
            k,
            strategies,
            crn,
            x0,
            sim,
            out,
        } => build(
            model,
            Some(r.r),
            ProblemConfig::Compare {
                cost: cost.clone(),
                k: *k,
                strategies: strategies.clone(),
                crn: *crn,
                x0: *x0,
            },
            Some(sim),
            out,
        ),
        Command::Run { config, out } => {
            let text = std::fs::read_to_string(config)
                .map_err(|e| Error::Parse(format!("cannot read {}: {e}", config.display())))?;
            let base = config.parent().map(Path::to_path_buf).unwrap_or_default();
            let mut cfg = parse_config_in(&text, &base)?;
            if let Some(p) = out {
                cfg.output.path = Some(p.display().to_string());
            }
            Ok(cfg)
        }
    }
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>> {
    match std::env::var("GWH_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(Error::Parse(format!("GWH_THREADS must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(flag),
    }
}

/// Entry point of the binary: parses `args`, runs, returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match thread_count(cli.threads) {
        Ok(Some(n)) => {
            // a second initialisation in the same process keeps the first pool
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        Ok(None) => {}
        Err(e) => {
            eprintln!("gwh: {e}");
            return e.exit_code();
        }
    }
    match config_from_command(&cli.command) {
        Ok(cfg) => run(&cfg),
        Err(e) => {
            eprintln!("gwh: {e}");
            e.exit_code()
        }
    }
}
