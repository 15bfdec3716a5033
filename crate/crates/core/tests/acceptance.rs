//! Desk-scale acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use gwh::control::{
    esscher_reduce, follower_control, follower_threshold, invest_index, invest_control, reduced_spec,
    subgradient_path, verify_first_order, CobbDouglasSpec, FollowerCostSpec, FollowerThreshold, InnerConfig,
    InvestIndex, Problem, Strategy, Tolerances,
};
use gwh::func::RealFn;
use gwh::gittins::{build_curve, gittins_threshold, representation_check, PayoffSpec};
use gwh::levy::{phi_right_inverse, simulate_replication, Discount, LevyModel, Track};
use gwh::mc::SimConfig;
use gwh::numerics::ks_distance;
use gwh::oracle::{dp_follower_oracle, dp_stopping_oracle, policy_comparison, LatticeSpec};
use gwh::stopping::perpetual_put;
use gwh::wiener_hopf::{simulate_extrema, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};

fn r(v: f64) -> Discount {
    Discount::new(v).unwrap()
}

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn extrema_exactness() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for (drift, seed) in [(0.0, 101), (-0.5, 102)] {
        let start = Instant::now();
        let m = LevyModel::brownian(drift, 1.0).unwrap();
        let phi = phi_right_inverse(&m, r(0.5)).unwrap();
        let s = simulate_extrema(&m, r(0.5), Side::Supremum, 100_000, 1e-3, seed).unwrap();
        let d = ks_distance(&s, |x| if x < 0.0 { 0.0 } else { 1.0 - (-phi * x).exp() });
        let secs = start.elapsed().as_secs_f64();
        ok &= d <= 0.02 && secs <= 120.0;
        notes.push(format!("drift {drift}: KS {d:.4} in {secs:.1}s"));
    }
    check(ok, notes.join("; "))
}

fn representation_identity() -> Outcome {
    let start = Instant::now();
    let bm = LevyModel::standard_brownian();
    let p = PayoffSpec::increasing(RealFn::exp());
    let (direct, repr) = representation_check(&p, &bm, r(1.0), 0.0, 100_000, 2.5e-3, None).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let agree = (direct.mean - repr.mean).abs() <= 3.0 * direct.stderr.hypot(repr.stderr);
    let near = (direct.mean - 2.0).abs() <= 3.0 * direct.stderr && (repr.mean - 2.0).abs() <= 3.0 * repr.stderr;
    check(
        agree && near && secs <= 120.0,
        format!(
            "direct {:.4} +- {:.4}, repr {:.4} +- {:.4}, {secs:.1}s",
            direct.mean, direct.stderr, repr.mean, repr.stderr
        ),
    )
}

fn stopping_oracle() -> Outcome {
    let bm = LevyModel::standard_brownian();
    let p = PayoffSpec::increasing(RealFn::linear(0.5));
    let lattice = LatticeSpec::new(-6.0, 6.0, 401, 1e-3).unwrap();
    let h = lattice.spacing();
    let curve = build_curve(&p, &bm, r(0.5), -6.0, 6.0, 401).unwrap();
    let mut notes = Vec::new();
    let mut ok = true;
    for c in [-0.5, 0.0, 0.5] {
        let start = Instant::now();
        let dp = dp_stopping_oracle(&p, &bm, r(0.5), c, &lattice).unwrap();
        let secs = start.elapsed().as_secs_f64();
        let g = gittins_threshold(&curve, c).finite();
        match (g, dp.threshold) {
            (Some(g), Some(d)) => {
                let cells = (g - d).abs() / h;
                ok &= cells <= 2.0 && secs <= 60.0;
                notes.push(format!("c {c}: index {g:.4} dp {d:.4} ({cells:.2} cells, {secs:.1}s)"));
            }
            other => {
                ok = false;
                notes.push(format!("c {c}: missing threshold {other:?}"));
            }
        }
    }
    check(ok, notes.join("; "))
}

fn perpetual_put_check() -> Outcome {
    let (mu, sigma, rr, k): (f64, f64, f64, f64) = (-0.5, 1.0, 0.5, 1.0);
    let a = 0.5 * sigma * sigma;
    let l = (-mu - (mu * mu + 4.0 * a * rr).sqrt()) / (2.0 * a);
    let b = k * l / (l - 1.0);
    let price = (k - b) * (1.0 / b).powf(l);
    let m = LevyModel::brownian(mu, sigma).unwrap();
    let res = perpetual_put(&m, r(rr), k, 0.0, &SimConfig::new(100_000, 1e-2, 4)).unwrap();
    let rel_b = (res.threshold - b).abs() / b;
    let rel_p = (res.price.mean - price).abs() / price;
    check(
        rel_b <= 1e-6 && rel_p <= 0.02,
        format!(
            "threshold {:.8} vs {b:.8} (rel {rel_b:.1e}); price {:.5} vs {price:.5} (rel {rel_p:.4})",
            res.threshold, res.price.mean
        ),
    )
}

fn follower_optimality() -> Outcome {
    let start = Instant::now();
    let bm = LevyModel::standard_brownian();
    let mut notes = Vec::new();
    let mut ok = true;
    for k in [0.0, 1.0] {
        let spec = FollowerCostSpec::quadratic(1.0, k).unwrap();
        let x_star = follower_threshold(&spec, &bm, r(0.5)).unwrap();

        let lattice = LatticeSpec::new(-6.0, 6.0, 401, 1e-3).unwrap();
        let o = dp_follower_oracle(&spec, &bm, r(0.5), &lattice).unwrap();
        let cells = (o.boundary - x_star).abs() / lattice.spacing();
        let a = o.acts && cells <= 2.0;
        notes.push(format!("K {k}: (a) x* {x_star:.4} dp {:.4} ({cells:.2} cells)", o.boundary));

        let shifts = [0.25, -0.25, 0.5, -0.5];
        let best = FollowerThreshold { threshold: x_star };
        let shifted: Vec<FollowerThreshold> =
            shifts.iter().map(|d| FollowerThreshold { threshold: x_star + d }).collect();
        let mut list: Vec<&dyn Strategy> = vec![&best];
        list.extend(shifted.iter().map(|s| s as &dyn Strategy));
        let t = policy_comparison(&Problem::Follower(spec.clone()), &bm, r(0.5), &list, 0.0, &SimConfig::new(50_000, 1e-2, 55))
            .unwrap();
        let mut b = true;
        let mut diffs = Vec::new();
        for (d, row) in shifts.iter().zip(&t.rows[1..]) {
            // J(shift) - J(theta*) must be positive with 95% confidence
            let lo = row.paired_diff.mean - 1.96 * row.paired_diff.stderr;
            b &= lo > 0.0;
            diffs.push(format!("{d:+}: {:.4} +- {:.4}", row.paired_diff.mean, row.paired_diff.stderr));
        }
        notes.push(format!("(b) {}", diffs.join(", ")));

        let path = simulate_replication(&bm, 5.0, 1e-2, x_star, 11, 0, Track::Max).unwrap();
        let verify = |level: f64| {
            let control = follower_control(&path, level);
            let sg = subgradient_path(&spec, &bm, level, r(0.5), &path, &control, &InnerConfig::default()).unwrap();
            verify_first_order(&sg, &control, r(0.5), &Tolerances::default())
        };
        let at = verify(x_star);
        let late = verify(x_star + 0.5);
        let early = verify(x_star - 0.5);
        let c = at.positivity_pass && at.flatoff_pass && !late.positivity_pass && !early.flatoff_pass;
        notes.push(format!(
            "(c) violations {:.4}, flat-off {:.4} +- {:.4}; +0.5 violations {:.4}; -0.5 flat-off {:.4} +- {:.4}",
            at.positivity_violation_rate,
            at.flatoff.sum,
            at.flatoff.stderr,
            late.positivity_violation_rate,
            early.flatoff.sum,
            early.flatoff.stderr
        ));
        ok &= a && b && c;
    }
    let secs = start.elapsed().as_secs_f64();
    notes.push(format!("{secs:.1}s"));
    check(ok && secs <= 600.0, notes.join("; "))
}

fn investment_specialization() -> Outcome {
    let mut worst: f64 = 0.0;
    for (drift, sigma) in [(0.0, 1.0), (0.1, 0.6), (-0.3, 1.4)] {
        let m = LevyModel::brownian(drift, sigma).unwrap();
        // -inf X at T(r) is Exp(eta)
        let eta = (drift + (drift * drift + 2.0 * sigma * sigma * 0.5).sqrt()) / (sigma * sigma);
        for alpha in [0.3, 0.5, 0.8] {
            let cd = CobbDouglasSpec::new(1.0 / (1.0 - alpha), alpha, 1.0).unwrap();
            let spec = cd.invest_spec(1.0).unwrap();
            for x in [-1.0, 0.0, 1.5] {
                let got = invest_index(&spec, &m, r(0.5), x).unwrap();
                let want = x.exp() * (eta / (eta + alpha) / 0.5).powf(1.0 / alpha);
                worst = worst.max((got - want).abs());
            }
        }
    }
    let m = LevyModel::brownian(0.1, 0.6).unwrap();
    let cd = CobbDouglasSpec::new(1.5, 0.4, 1.2).unwrap();
    let spec = cd.invest_spec(1.0).unwrap();
    let index = InvestIndex::new(&spec, &m, r(0.5)).unwrap();
    let delta = cd.delta(&m, r(0.5), 1.0).unwrap();
    let gamma = cd.gamma();
    let mut breaches = 0usize;
    let mut points = 0usize;
    for rep in 0..1_000 {
        let path = simulate_replication(&m, 5.0, 1e-2, 0.0, 66, rep, Track::Max).unwrap();
        let theta = invest_control(&path, |x| delta * (gamma * x).exp()).theta;
        for (x, t) in path.values.iter().zip(&theta) {
            points += 1;
            // the ceiling uses the exact law, so its standard error is zero
            let ceiling = index.marginal_profit_ceiling(*x).unwrap();
            if spec.production.marginal(*t) * spec.q.eval(*x) > ceiling * (1.0 + 1e-9) {
                breaches += 1;
            }
        }
    }
    check(
        worst <= 1e-6 && breaches == 0,
        format!("closed form max error {worst:.2e}; ceiling breaches {breaches}/{points}"),
    )
}

/// Infimum of `BM(m, s)` at an independent `Exp(rate)` time, sampled from the
/// endpoint and the exact bridge minimum.
fn bridge_infimum(rng: &mut ChaCha8Rng, m: f64, s: f64, rate: f64) -> f64 {
    let t: f64 = Exp::new(rate).unwrap().sample(rng);
    let z: f64 = StandardNormal.sample(rng);
    let end = m * t + s * t.sqrt() * z;
    let u: f64 = 1.0 - rng.random::<f64>();
    0.5 * (end - (end * end - 2.0 * s * s * t * u.ln()).sqrt())
}

fn esscher_reduction() -> Outcome {
    let alpha = 0.5;
    let x = LevyModel::brownian(0.2, 0.9).unwrap();
    let red0 = esscher_reduce(&x, &LevyModel::zero(), r(0.5), alpha).unwrap();
    let direct = invest_index(&reduced_spec(alpha).unwrap(), &x, r(0.5), 0.0).unwrap();
    let bitwise = red0.beta_coef.to_bits() == direct.to_bits() && red0.r_tilde.to_bits() == 0.5f64.to_bits();

    let bm = LevyModel::standard_brownian();
    let red = esscher_reduce(&bm, &bm, r(1.0), alpha).unwrap();
    let mut tilt_err: f64 = 0.0;
    for c in [-1.5, -0.7, 0.0, 0.2, 1.3, 2.5] {
        let lhs = red.tilted_y.laplace_exponent(c).unwrap();
        let rhs = bm.laplace_exponent(c + 1.0).unwrap() - bm.laplace_exponent(1.0).unwrap();
        tilt_err = tilt_err.max((lhs - rhs).abs());
    }

    // Z = X - Y~ is BM(-1, sqrt 2); rate r - psi_Y(1) = 0.5;
    // beta_coef^alpha = E[e^{inf Z}] / r~
    let (zm, zs, rt) = (-1.0, 2f64.sqrt(), 0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let n = 1_000_000;
    let (mut sum, mut sq) = (0.0, 0.0);
    for _ in 0..n {
        let v = bridge_infimum(&mut rng, zm, zs, rt).exp();
        sum += v;
        sq += v * v;
    }
    let mean = sum / n as f64;
    let se = ((sq / n as f64 - mean * mean) / (n - 1) as f64).sqrt();
    let est = (mean / rt).powf(1.0 / alpha);
    // delta method through y -> (y / rt)^(1/alpha)
    let est_se = (1.0 / alpha) * (mean / rt).powf(1.0 / alpha - 1.0) * se / rt;
    let z = (red.beta_coef - est).abs() / est_se;
    check(
        bitwise && tilt_err <= 1e-10 && z <= 3.0,
        format!(
            "Y = 0 bitwise {bitwise}; tilt error {tilt_err:.1e}; beta_coef {:.6} vs MC {est:.6} +- {est_se:.6} ({z:.2} SE)",
            red.beta_coef
        ),
    )
}

fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("jumpy.toml"),
        "drift = 0.1\nsigma = 0.8\n[[jump]]\nkind = \"exp_down\"\nrate = 1.0\nb = 2.0\n",
    )
    .unwrap();
    let runs: &[&[&str]] = &[
        &["psi", "--model", "jumpy.toml", "--c", "0.5"],
        &["phi", "--model", "jumpy.toml", "--r", "0.5"],
        &["extrema", "--model", "jumpy.toml", "--r", "0.5", "--side", "inf", "--reps", "2000", "--step", "1e-2", "--ks-paths", "2000"],
        &["extrema", "--model", "jumpy.toml", "--r", "0.5", "--side", "sup", "--scale-x-max", "3"],
        &["kappa", "--model", "jumpy.toml", "--r", "0.5", "--payoff", "exp", "--x", "-1:1:5"],
        &["stop", "--model", "bm:sigma=1", "--r", "0.5", "--payoff", "linear:a=0.5", "--c", "0", "--x", "-1", "--reps", "2000", "--step", "1e-2", "--repr"],
        &["put", "--model", "bm:drift=-0.5,sigma=1", "--r", "0.5", "--strike", "1", "--reps", "2000", "--step", "1e-2"],
        &["follower", "--model", "bm:sigma=1", "--cost", "quadratic:k=1.0", "--K", "0.5", "--r", "0.5", "--verify", "--reps", "500", "--step", "1e-2"],
        &["invest", "--model", "bm:sigma=1", "--cobb", "C=2,alpha=0.5,beta=1", "--K", "1", "--r", "0.5", "--x", "-1:1:3", "--evaluate", "--reps", "500", "--step", "1e-2"],
        &["esscher-invest", "--model", "bm:sigma=1", "--model-y", "bm:sigma=1", "--r", "1", "--alpha", "0.5"],
        &["oracle-stop", "--model", "bm:sigma=1", "--r", "0.5", "--payoff", "linear:a=0.5", "--c", "0", "--x-lo", "-6", "--x-hi", "6", "--nodes", "101", "--dt", "1e-2"],
        &["oracle-follower", "--model", "bm:sigma=1", "--r", "0.5", "--cost", "quadratic:k=1", "--K", "0", "--x-lo", "-5", "--x-hi", "4", "--nodes", "101", "--dt", "1e-2"],
        &["compare", "--model", "bm:sigma=1", "--r", "0.5", "--cost", "quadratic:k=1", "--K", "0.5", "--strategies", "theta_star,shift:+0.5,shift:-0.5,zero", "--crn", "--reps", "500", "--step", "1e-2"],
        &["compare", "--model", "bm:sigma=1", "--r", "0.5", "--cost", "quadratic:k=1", "--K", "0.5", "--strategies", "theta_star,zero", "--reps", "500", "--step", "1e-2"],
    ];
    let exec = |dir: &Path, threads: &str, args: &[&str]| {
        let out = Command::new(env!("CARGO_BIN_EXE_gwh"))
            .current_dir(dir)
            .env_remove("GWH_THREADS")
            .arg("--threads")
            .arg(threads)
            .args(args)
            .output()
            .unwrap();
        (out.status.code(), out.stdout)
    };
    let mut bad = Vec::new();
    for args in runs {
        let a = exec(dir.path(), "1", args);
        let b = exec(dir.path(), "1", args);
        let c = exec(dir.path(), "4", args);
        if a.0 != Some(0) || a.1.is_empty() || a != b || a != c {
            bad.push(format!("{} (exit {:?})", args[0], a.0));
        }
    }
    check(
        bad.is_empty(),
        if bad.is_empty() {
            format!("{} runs identical across repeats and --threads 1/4", runs.len())
        } else {
            format!("differs: {}", bad.join(", "))
        },
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 extrema-law exactness", extrema_exactness),
        ("2 index representation identity", representation_identity),
        ("3 stopping oracle agreement", stopping_oracle),
        ("4 perpetual put", perpetual_put_check),
        ("5 follower optimality", follower_optimality),
        ("6 investment specialization", investment_specialization),
        ("7 Esscher reduction", esscher_reduction),
        ("8 CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
