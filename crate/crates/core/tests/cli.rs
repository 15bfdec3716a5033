use std::path::Path;
use std::process::{Command, Output};

fn gwh(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gwh"))
        .current_dir(dir)
        .env_remove("GWH_THREADS")
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

const MODEL: &str = "drift = 0.0\nsigma = 1.0\n";

#[test]
fn follower_verify_passes_at_derived_threshold() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("M.toml"), MODEL).unwrap();
    let out = gwh(
        dir.path(),
        &[
            "follower", "--model", "M.toml", "--cost", "quadratic:k=1.0", "--K", "0.5", "--r", "0.5", "--verify",
            "--reps", "1000", "--step", "1e-2", "--out", "report.json",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = json(&dir.path().join("report.json"));
    assert_eq!(rep["schema_version"], 1);
    assert_eq!(rep["foc"]["pass"], true);
    assert!((rep["threshold"].as_f64().unwrap() - 1.25).abs() < 1e-8);
    assert!(rep["cost"]["mean"].is_f64() && rep["cost"]["stderr"].is_f64());
    assert!(rep["foc"]["flatoff"]["sum"].is_f64());
    assert_eq!(rep["config"]["sim"]["reps"], 1000);
    assert_eq!(rep["config"]["problem"]["K"], 0.5);
}

#[test]
fn never_stop_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = gwh(
        dir.path(),
        &["stop", "--model", "bm:drift=0,sigma=1", "--r", "0.5", "--payoff", "const:c0=-1", "--c", "0", "--x", "0"],
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("never stop"));
}

#[test]
fn validation_failures_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "sigma = 1.0\n[jump]\nkind = \"exp_up\"\nrate = 1.0\n").unwrap();
    let out = gwh(dir.path(), &["phi", "--model", "bad.toml", "--r", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("jump.a"));

    let out = gwh(dir.path(), &["phi", "--model", "bm:sigma=1", "--r", "-1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("r > 0"));

    let out = gwh(
        dir.path(),
        &["compare", "--model", "bm:sigma=1", "--r", "0.5", "--cost", "quadratic:k=1", "--K", "0.5", "--strategies", "best"],
    );
    assert_eq!(out.status.code(), Some(2));

    let out = gwh(dir.path(), &["psi", "--model", "bm:sigma=1", "--c", "1", "--format", "csv", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_config_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir(dir.path().join("models")).unwrap();
    std::fs::write(
        dir.path().join("models/jumpy.toml"),
        "drift = 0.1\nsigma = 0.8\n[[jump]]\nkind = \"exp_down\"\nrate = 1.0\nb = 2.0\n",
    )
    .unwrap();
    std::fs::write(
        dir.path().join("cfg.toml"),
        "model = \"models/jumpy.toml\"\nr = 0.5\n[problem]\nkind = \"kappa\"\npayoff = \"exp:k=1,c=1\"\nx = \"-1:1:5\"\n[output]\npath = \"k.csv\"\n",
    )
    .unwrap();
    let out = gwh(dir.path(), &["run", "--config", "cfg.toml"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("k.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,kappa,stderr");
    assert_eq!(lines.len(), 6);
    assert_eq!(lines[1].split(',').next().unwrap(), "-1.0000000000000000e0");

    std::fs::write(dir.path().join("typo.toml"), "model = \"models/jumpy.toml\"\nr = 0.5\nrr = 1\n[problem]\nkind = \"phi\"\n").unwrap();
    assert_eq!(gwh(dir.path(), &["run", "--config", "typo.toml"]).status.code(), Some(2));
}

#[test]
fn oracle_csv_and_compare_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = gwh(
        dir.path(),
        &[
            "oracle-stop", "--model", "bm:sigma=1", "--r", "0.5", "--payoff", "linear:a=0.5", "--c", "0", "--x-lo", "-6",
            "--x-hi", "6", "--nodes", "121", "--dt", "5e-3", "--out", "o.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("o.csv")).unwrap();
    assert!(text.starts_with("node,value\n"));
    assert_eq!(text.lines().count(), 122);

    let out = gwh(
        dir.path(),
        &[
            "compare", "--model", "bm:sigma=1", "--r", "0.5", "--cost", "quadratic:k=1", "--K", "0.5", "--strategies",
            "theta_star,shift:+0.5,shift:-0.5,zero", "--crn", "--reps", "300", "--step", "2e-2", "--out", "c.json",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = json(&dir.path().join("c.json"));
    let rows = rep["table"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[1]["name"], "shift:+0.5");
    assert_eq!(rows[0]["paired_diff"]["mean"], 0.0);
}

#[test]
fn reports_are_reproducible_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    let args = |threads: &'static str| {
        vec![
            "--threads", threads, "stop", "--model", "bm:sigma=1", "--r", "0.5", "--payoff", "linear:a=0.5", "--c", "0",
            "--x", "-1", "--reps", "2000", "--step", "1e-2", "--seed", "7", "--repr",
        ]
    };
    let first = gwh(dir.path(), &args("1"));
    assert_eq!(first.status.code(), Some(0));
    assert!(!first.stdout.is_empty());
    assert_eq!(first.stdout, gwh(dir.path(), &args("1")).stdout);
    assert_eq!(first.stdout, gwh(dir.path(), &args("4")).stdout);
    let out = Command::new(env!("CARGO_BIN_EXE_gwh"))
        .current_dir(dir.path())
        .env("GWH_THREADS", "4")
        .args(args("1"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(first.stdout, out.stdout);
}
