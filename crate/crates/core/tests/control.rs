use gwh::control::{
    cost_functional, esscher_reduce, follower_control, follower_threshold, invest_control,
    invest_index, subgradient_path, verify_first_order, CobbDouglasSpec, ConstantControl,
    ControlPath, FollowerCostSpec, FollowerThreshold, InnerConfig, InvestIndex, Problem,
    Tolerances, ZeroControl,
};
use gwh::levy::{simulate_replication, Discount, LevyModel, SamplePath, Track};
use gwh::mc::SimConfig;
use proptest::prelude::*;

fn r(v: f64) -> Discount {
    Discount::new(v).unwrap()
}

fn flat_path(x: f64, n: usize) -> SamplePath {
    SamplePath {
        step: 0.01,
        values: vec![x; n],
        seed: 0,
        replication: 0,
        step_max: None,
        step_min: None,
    }
}

/// DJ at a single state `(x, theta)`.
fn dj_at(spec: &FollowerCostSpec, x_star: f64, x: f64, theta: f64, seed: u64) -> (f64, f64) {
    let bm = LevyModel::standard_brownian();
    let path = flat_path(x, 1);
    let control = ControlPath {
        step: 0.01,
        theta: vec![theta],
    };
    let inner = InnerConfig {
        reps: 4_000,
        seed,
        stride: 1,
        ..InnerConfig::default()
    };
    let sg = subgradient_path(spec, &bm, x_star, r(0.5), &path, &control, &inner).unwrap();
    let p = &sg.points[0];
    (p.dj, p.stderr)
}

/// Rate of `-inf X` at `Exp(r)` for `BM(m, s)`.
fn infimum_rate(m: f64, s: f64, r: f64) -> f64 {
    (m + (m * m + 2.0 * s * s * r).sqrt()) / (s * s)
}

#[test]
fn quadratic_thresholds_shift_with_k() {
    let bm = LevyModel::standard_brownian();
    for (k, want) in [(0.0, 1.0), (1.0, 2.0), (2.0, 3.0)] {
        let spec = FollowerCostSpec::quadratic(0.5, k).unwrap();
        let x = follower_threshold(&spec, &bm, r(0.5)).unwrap();
        assert!((x - want).abs() < 1e-8, "K = {k}: {x}");
    }
}

#[test]
fn zero_control_cost_is_uncontrolled_integral() {
    // c(y) = y^2/2 on BM from 0: E int X_t^2/2 e^{-rt} dt = 1/(2 r^2)
    let bm = LevyModel::standard_brownian();
    let spec = FollowerCostSpec::quadratic(1.0, 0.7).unwrap();
    let est = cost_functional(&Problem::Follower(spec), &bm, &ZeroControl, r(0.5), 0.0, &SimConfig::new(4_000, 1e-2, 3))
        .unwrap();
    assert!((est.mean - 2.0).abs() < 3.0 * est.stderr + 0.02, "{est:?}");
}

#[test]
fn constant_control_adds_intervention_cost() {
    let bm = LevyModel::standard_brownian();
    let spec = FollowerCostSpec::quadratic(1.0, 0.7).unwrap();
    let problem = Problem::Follower(spec);
    let sim = SimConfig::new(2_000, 1e-2, 3).with_horizon(20.0);
    let shifted = cost_functional(&problem, &bm, &ConstantControl { level: 1.0 }, r(0.5), 0.0, &sim).unwrap();
    // X - 1 from 0 is X from -1: 1/(2 r^2) + 1/(2r) + K, up to the horizon
    let want = 2.0 + 1.0 + 0.7;
    assert!((shifted.mean - want).abs() < 3.0 * shifted.stderr + 0.03, "{shifted:?}");
}

#[test]
fn dj_far_below_threshold_is_positive() {
    let spec = FollowerCostSpec::quadratic(1.0, 0.5).unwrap();
    let x_star = follower_threshold(&spec, &LevyModel::standard_brownian(), r(0.5)).unwrap();
    let (dj, se) = dj_at(&spec, x_star, x_star - 5.0, 0.0, 1);
    assert!(dj > 5.0 * se, "{dj} +- {se}");
}

#[test]
fn dj_vanishes_at_reflection() {
    let spec = FollowerCostSpec::quadratic(1.0, 0.5).unwrap();
    let x_star = follower_threshold(&spec, &LevyModel::standard_brownian(), r(0.5)).unwrap();
    let (dj, se) = dj_at(&spec, x_star, x_star + 1.0, 1.0, 2);
    assert!(dj.abs() <= 3.0 * se, "{dj} +- {se}");
}

#[test]
fn dj_depends_on_the_gap_only() {
    let spec = FollowerCostSpec::quadratic(1.0, 0.5).unwrap();
    let x_star = follower_threshold(&spec, &LevyModel::standard_brownian(), r(0.5)).unwrap();
    let (a, sa) = dj_at(&spec, x_star, 2.0, 1.0, 3);
    let (b, sb) = dj_at(&spec, x_star, 1.5, 0.5, 4);
    assert!((a - b).abs() <= 3.0 * sa.hypot(sb), "{a} vs {b}");
}

#[test]
fn first_order_conditions_single_out_the_threshold() {
    let bm = LevyModel::standard_brownian();
    let spec = FollowerCostSpec::quadratic(0.5, 1.0).unwrap();
    let x_star = follower_threshold(&spec, &bm, r(0.5)).unwrap();
    let path = simulate_replication(&bm, 5.0, 1e-2, x_star, 11, 0, Track::Max).unwrap();
    let check = |b: f64| {
        let control = follower_control(&path, b);
        let sg = subgradient_path(&spec, &bm, b, r(0.5), &path, &control, &InnerConfig::default()).unwrap();
        verify_first_order(&sg, &control, r(0.5), &Tolerances::default())
    };
    let best = check(x_star);
    assert!(best.pass, "{best:?}");
    // acting too late leaves DJ < 0 in the continuation region
    let late = check(x_star + 0.5);
    assert!(!late.positivity_pass, "{late:?}");
    // acting too early pays DJ > 0 on the increases
    let early = check(x_star - 0.5);
    assert!(early.flatoff.sum > 3.0 * early.flatoff.stderr, "{early:?}");
}

#[test]
fn cobb_douglas_closed_form() {
    let bm = LevyModel::standard_brownian();
    let cd = CobbDouglasSpec::new(2.0, 0.5, 1.0).unwrap();
    let l0 = invest_index(&cd.invest_spec(1.0).unwrap(), &bm, r(0.5), 0.0).unwrap();
    assert!((l0 - 16.0 / 9.0).abs() < 1e-9, "{l0}");
}

#[test]
fn invest_control_on_flat_and_falling_paths() {
    let l = |x: f64| (2.0 * x).exp();
    let flat = flat_path(0.3, 5);
    assert!(invest_control(&flat, l).theta.iter().all(|&t| t == l(0.3)));
    let falling = SamplePath {
        values: vec![0.3, 0.1, -0.2, -0.4],
        ..flat_path(0.0, 4)
    };
    assert!(invest_control(&falling, l).theta.iter().all(|&t| t == l(0.3)));
}

#[test]
fn marginal_profit_ceiling_on_paths() {
    let m = LevyModel::brownian(0.1, 0.6).unwrap();
    let cd = CobbDouglasSpec::new(1.5, 0.4, 1.2).unwrap();
    let spec = cd.invest_spec(1.0).unwrap();
    let index = InvestIndex::new(&spec, &m, r(0.5)).unwrap();
    let delta = cd.delta(&m, r(0.5), 1.0).unwrap();
    let gamma = cd.gamma();
    for rep in 0..50 {
        let path = simulate_replication(&m, 5.0, 1e-2, 0.0, 6, rep, Track::Max).unwrap();
        let theta = invest_control(&path, |x| delta * (gamma * x).exp()).theta;
        for (x, t) in path.values.iter().zip(&theta) {
            let lhs = spec.production.marginal(*t) * spec.q.eval(*x);
            let ceiling = index.marginal_profit_ceiling(*x).unwrap();
            assert!(lhs <= ceiling * (1.0 + 1e-9), "{lhs} > {ceiling}");
        }
    }
}

#[test]
fn esscher_tilt_identity_for_brownian_pair() {
    let bm = LevyModel::standard_brownian();
    let red = esscher_reduce(&bm, &bm, r(1.0), 0.5).unwrap();
    for c in [-0.7, 0.2, 1.3] {
        let lhs = red.tilted_y.laplace_exponent(c).unwrap();
        let rhs = bm.laplace_exponent(c + 1.0).unwrap() - bm.laplace_exponent(1.0).unwrap();
        assert!((lhs - rhs).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn quadratic_threshold_formula(
        m in -0.8f64..0.8, s in 0.3f64..1.5, rr in 0.1f64..1.5, scale in 0.2f64..3.0, k in 0.0f64..3.0
    ) {
        let model = LevyModel::brownian(m, s).unwrap();
        let spec = FollowerCostSpec::quadratic(scale, k).unwrap();
        let x = follower_threshold(&spec, &model, r(rr)).unwrap();
        // kappa(x) = scale (x - 1/eta) / r - K
        let want = 1.0 / infimum_rate(m, s, rr) + rr * k / scale;
        prop_assert!((x - want).abs() < 1e-7 * want.abs().max(1.0), "{} vs {}", x, want);
    }

    #[test]
    fn reflection_is_minimal_and_keeps_gap_below(seed in 0u64..500, b in -1.0f64..2.0) {
        let bm = LevyModel::standard_brownian();
        let path = simulate_replication(&bm, 2.0, 1e-2, 0.0, seed, 0, Track::Max).unwrap();
        let c = follower_control(&path, b);
        prop_assert!(c.is_nondecreasing());
        let mut top = path.values[0];
        prop_assert!((c.theta[0] - (top - b).max(0.0)).abs() < 1e-12);
        for i in 1..path.len() {
            top = top.max(path.upper(i - 1));
            prop_assert!((c.theta[i] - (top - b).max(0.0)).abs() < 1e-12);
            prop_assert!(path.values[i] - c.theta[i] <= b + 1e-12);
        }
    }

    #[test]
    fn duplicate_strategies_have_identical_costs(seed in 0u64..50) {
        let bm = LevyModel::standard_brownian();
        let spec = FollowerCostSpec::quadratic(1.0, 0.5).unwrap();
        let x_star = follower_threshold(&spec, &bm, r(0.5)).unwrap();
        let sim = SimConfig::new(400, 2e-2, seed).with_horizon(20.0);
        let problem = Problem::Follower(spec);
        let (rows, _) = gwh::control::policy_costs(
            &problem, &bm, &[&FollowerThreshold { threshold: x_star }, &FollowerThreshold { threshold: x_star }],
            r(0.5), 0.0, &sim,
        ).unwrap();
        prop_assert_eq!(&rows[0], &rows[1]);
    }
}
