use loolsm_core::market::{ExerciseSchedule, GbmModel};
use loolsm_core::normal;
use loolsm_core::oracles::{
    bestof2_european_call, binomial_bermudan_put, bivariate_normal_cdf, bs_european_call, bs_european_put,
};

/// `P[X <= a, Y <= b]` by Simpson quadrature of `phi(x) Phi((b - rho x) / sqrt(1 - rho^2))`.
fn bivariate_by_quadrature(a: f64, b: f64, rho: f64) -> f64 {
    let lower = -12.0;
    let upper = a.min(12.0);
    if upper <= lower {
        return 0.0;
    }
    let steps = 20_000;
    let h = (upper - lower) / steps as f64;
    let s = (1.0 - rho * rho).sqrt();
    let f = |x: f64| normal::pdf(x) * normal::cdf((b - rho * x) / s);
    let mut total = f(lower) + f(upper);
    for k in 1..steps {
        let x = lower + k as f64 * h;
        total += if k % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
    }
    total * h / 3.0
}

#[test]
fn bivariate_matches_quadrature() {
    let points = [-2.5, -1.0, -0.3, 0.0, 0.4, 1.2, 2.8];
    for &rho in &[-0.95, -0.7, -0.2, 0.1, 0.5, 0.8, 0.93, 0.99] {
        for &a in &points {
            for &b in &points {
                let got = bivariate_normal_cdf(a, b, rho);
                let want = bivariate_by_quadrature(a, b, rho);
                assert!((got - want).abs() < 1e-9, "a {a} b {b} rho {rho}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn bivariate_symmetry_and_monotonicity() {
    let grid: Vec<f64> = (-12..=12).map(|k| k as f64 * 0.25).collect();
    let rhos: Vec<f64> = (-9..=9).map(|k| k as f64 * 0.11).collect();
    for &rho in &rhos {
        for &a in &grid {
            let mut last = 0.0;
            for &b in &grid {
                let v = bivariate_normal_cdf(a, b, rho);
                assert!((v - bivariate_normal_cdf(b, a, rho)).abs() < 1e-14);
                assert!(v >= last - 1e-15);
                last = v;
            }
        }
    }
    for &a in &grid {
        for &b in &grid {
            let mut last = 0.0;
            for &rho in &rhos {
                let v = bivariate_normal_cdf(a, b, rho);
                assert!(v >= last - 1e-15, "a {a} b {b} rho {rho}");
                last = v;
            }
        }
    }
}

#[test]
fn black_scholes_put_table_values() {
    let put = |k| bs_european_put(100.0, 0.2, 0.05, 0.02, k, 1.0);
    assert!((put(100.0) - 6.330).abs() < 1e-3);
    assert!((put(120.0) - 18.839).abs() < 1e-3);
    assert_eq!(bs_european_put(100.0, 0.0, 0.05, 0.02, 80.0, 1.0), 0.0);
}

#[test]
fn best_of_call_table_values() {
    for (spot, want) in [(90.0, 6.655), (100.0, 11.196), (110.0, 16.929)] {
        let model = GbmModel::symmetric(2, spot, 0.05, 0.1, 0.2, 0.0).unwrap();
        let v = bestof2_european_call(&model, 100.0, 3.0).unwrap();
        assert!((v - want).abs() < 1e-3, "S0 {spot}: {v}");
    }
}

#[test]
fn best_of_with_a_vanishing_second_asset_is_a_vanilla_call() {
    let model =
        GbmModel::new(vec![100.0, 100.0], 0.05, vec![0.1, 8.0], vec![0.2, 1e-4], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
    let best = bestof2_european_call(&model, 100.0, 3.0).unwrap();
    let vanilla = bs_european_call(100.0, 0.2, 0.05, 0.1, 100.0, 3.0);
    assert!((best - vanilla).abs() < 1e-8, "{best} vs {vanilla}");
}

#[test]
fn best_of_dominates_each_single_asset_call() {
    let model =
        GbmModel::new(vec![95.0, 105.0], 0.05, vec![0.1, 0.05], vec![0.25, 0.2], vec![1.0, 0.4, 0.4, 1.0]).unwrap();
    let best = bestof2_european_call(&model, 100.0, 2.0).unwrap();
    assert!(best > bs_european_call(95.0, 0.25, 0.05, 0.1, 100.0, 2.0));
    assert!(best > bs_european_call(105.0, 0.2, 0.05, 0.05, 100.0, 2.0));
}

fn put_model() -> (GbmModel, ExerciseSchedule) {
    (GbmModel::single_asset(100.0, 0.05, 0.02, 0.2).unwrap(), ExerciseSchedule::uniform(5, 1.0).unwrap())
}

#[test]
fn binomial_converges_past_fifty_thousand_steps() {
    let (model, schedule) = put_model();
    let coarse = binomial_bermudan_put(&model, &schedule, 100.0, 50_000).unwrap();
    let fine = binomial_bermudan_put(&model, &schedule, 100.0, 100_000).unwrap();
    assert!((coarse - fine).abs() <= 5e-4);
    assert!((fine - 6.585).abs() < 1e-3);
}

#[test]
fn bermudan_put_dominates_european() {
    let (model, schedule) = put_model();
    for strike in [80.0, 90.0, 100.0, 110.0, 120.0] {
        let bermudan = binomial_bermudan_put(&model, &schedule, strike, 5_000).unwrap();
        let european = bs_european_put(100.0, 0.2, 0.05, 0.02, strike, 1.0);
        assert!(bermudan >= european, "K {strike}");
    }
}

#[test]
fn single_date_tree_is_european() {
    let model = GbmModel::single_asset(100.0, 0.05, 0.02, 0.2).unwrap();
    let schedule = ExerciseSchedule::new(vec![1.0]).unwrap();
    let tree = binomial_bermudan_put(&model, &schedule, 100.0, 20_000).unwrap();
    assert!((tree - bs_european_put(100.0, 0.2, 0.05, 0.02, 100.0, 1.0)).abs() < 1e-3);
}
