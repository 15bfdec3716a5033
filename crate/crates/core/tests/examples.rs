//! Every runnable example, executed as a test.

mod levy_exponent {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/levy_exponent.rs"));

    #[test]
    fn runs() {
        let phi = run_example();
        assert!(phi > 0.0 && phi.is_finite());
    }
}

mod extrema_laws {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/extrema_laws.rs"));

    #[test]
    fn runs() {
        let (exact, mc) = run_example();
        assert!((exact - mc).abs() < 0.02, "{exact} vs {mc}");
    }
}

mod gittins_index {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/gittins_index.rs"));

    #[test]
    fn runs() {
        let x = run_example();
        for (got, want) in x.iter().zip([0.5, 1.0, 1.5]) {
            assert!((got - want).abs() < 1e-6, "{got} vs {want}");
        }
    }
}

mod optimal_stopping {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/optimal_stopping.rs"));

    #[test]
    fn runs() {
        let (a, b) = run_example();
        assert!((a - b).abs() < 0.05, "{a} vs {b}");
    }
}

mod perpetual_put {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/perpetual_put.rs"));

    #[test]
    fn runs() {
        let p = run_example();
        assert!((p - 0.3409).abs() < 0.01, "{p}");
    }
}

mod monotone_follower {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/monotone_follower.rs"));

    #[test]
    fn runs() {
        let (x_star, pass) = run_example();
        assert!((x_star - 1.25).abs() < 1e-6);
        assert!(pass);
    }
}

mod irreversible_investment {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/irreversible_investment.rs"));

    #[test]
    fn runs() {
        assert!(run_example() > 0.0);
    }
}

mod esscher_reduction {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/esscher_reduction.rs"));

    #[test]
    fn runs() {
        let beta = run_example();
        let eta = (3f64.sqrt() - 1.0) / 2.0;
        assert!((beta - (2.0 * eta / (eta + 1.0)).powi(2)).abs() < 1e-9);
    }
}

mod lattice_oracle {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/lattice_oracle.rs"));

    #[test]
    fn runs() {
        let (stop, follow) = run_example();
        assert!((stop - 1.0).abs() < 0.1, "{stop}");
        assert!((follow - 2.0).abs() < 0.1, "{follow}");
    }
}

mod policy_comparison {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/policy_comparison.rs"));

    #[test]
    fn runs() {
        let diffs = run_example();
        assert_eq!(diffs[0], 0.0);
        assert!(diffs[1..].iter().all(|&d| d > 0.0), "{diffs:?}");
    }
}

mod config_file {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/config_file.rs"));

    #[test]
    fn runs() {
        assert!(run_example() > 0.5);
    }
}
