// A run configuration in TOML, executed the way `gwh run` does it.

use gwh::cli::{execute, parse_config, Report};

const CONFIG: &str = r#"
r = 0.5

[model]
drift = 0.0
sigma = 1.0
[[model.jump]]
kind = "exp_down"
rate = 0.5
b = 2.0

[problem]
kind = "follower"
cost = "quadratic:k=1.0"
K = 0.5

[sim]
reps = 500
step = 0.01
seed = 9
"#;

pub fn run_example() -> f64 {
    let cfg = parse_config(CONFIG).expect("valid config");
    let out = execute(&cfg).expect("run succeeds");
    let Report::Json(json) = out.report else {
        unreachable!("follower reports are JSON")
    };
    println!("{}", serde_json::to_string_pretty(&json["cost"]).unwrap());
    json["threshold"].as_f64().unwrap()
}

#[allow(dead_code)]
fn main() {
    run_example();
}
