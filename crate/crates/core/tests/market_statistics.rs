use loolsm_core::contracts::{discounted_payout, PayoffKind, PayoffSpec};
use loolsm_core::market::{generate_paths, ExerciseSchedule, GbmModel, PathGenerator};
use loolsm_core::stats;

/// Discounted terminal prices `e^{-(r-q)T} S_j(T)` for asset `j`, generated in blocks.
fn terminal_martingale(model: &GbmModel, schedule: &ExerciseSchedule, n: usize, seed: u64, asset: usize) -> Vec<f64> {
    let generator = PathGenerator::new(model, schedule).unwrap();
    let len = generator.path_len();
    let block = 10_000;
    let t = schedule.maturity();
    let scale = (-(model.rate() - model.dividend()[asset]) * t).exp();
    let last = (schedule.len() - 1) * model.dim() + asset;
    let mut out = Vec::with_capacity(n);
    let mut buffer = vec![0.0; block * len];
    for first in (0..n).step_by(block) {
        generator.fill(seed, true, first, &mut buffer);
        out.extend(buffer.chunks_exact(len).map(|p| scale * p[last]));
    }
    out
}

#[test]
fn discounted_prices_are_martingales() {
    let cases = [
        (GbmModel::single_asset(100.0, 0.05, 0.02, 0.2).unwrap(), ExerciseSchedule::uniform(5, 1.0).unwrap()),
        (GbmModel::symmetric(2, 100.0, 0.05, 0.1, 0.2, 0.0).unwrap(), ExerciseSchedule::uniform(9, 3.0).unwrap()),
        (GbmModel::symmetric(4, 100.0, 0.0, 0.0, 0.4, 0.5).unwrap(), ExerciseSchedule::uniform(10, 5.0).unwrap()),
    ];
    for (c, (model, schedule)) in cases.iter().enumerate() {
        for asset in 0..model.dim() {
            let values = terminal_martingale(model, schedule, 1_000_000, 1000 + c as u64, asset);
            let se = stats::standard_error(&values, true);
            let z = (stats::mean(&values) - 100.0) / se;
            assert!(z.abs() < 4.0, "case {c} asset {asset}: z = {z}");
        }
    }
}

#[test]
fn put_case_terminal_mean() {
    let model = GbmModel::single_asset(100.0, 0.05, 0.02, 0.2).unwrap();
    let schedule = ExerciseSchedule::uniform(5, 1.0).unwrap();
    let paths = generate_paths(&model, &schedule, 100_000, 8, true).unwrap();
    let terminal: Vec<f64> = (0..paths.n_paths()).map(|n| paths.state(n, 4)[0]).collect();
    let se = stats::standard_error(&terminal, true);
    let forward = 100.0 * 0.03f64.exp();
    assert!((stats::mean(&terminal) - forward).abs() < 3.0 * se);
    assert!(paths.values().iter().all(|&v| v > 0.0));
}

#[test]
fn correlation_is_realized() {
    let model = GbmModel::symmetric(4, 100.0, 0.0, 0.0, 0.4, 0.5).unwrap();
    let schedule = ExerciseSchedule::new(vec![0.5]).unwrap();
    let paths = generate_paths(&model, &schedule, 200_000, 9, false).unwrap();
    let logs: Vec<[f64; 4]> = (0..paths.n_paths())
        .map(|n| {
            let s = paths.state(n, 0);
            [(s[0] / 100.0).ln(), (s[1] / 100.0).ln(), (s[2] / 100.0).ln(), (s[3] / 100.0).ln()]
        })
        .collect();
    let mean = |j: usize| logs.iter().map(|l| l[j]).sum::<f64>() / logs.len() as f64;
    let cov = |a: usize, b: usize| {
        let (ma, mb) = (mean(a), mean(b));
        logs.iter().map(|l| (l[a] - ma) * (l[b] - mb)).sum::<f64>() / (logs.len() - 1) as f64
    };
    for a in 0..4 {
        for b in a + 1..4 {
            let rho = cov(a, b) / (cov(a, a) * cov(b, b)).sqrt();
            assert!((rho - 0.5).abs() < 0.01, "rho({a},{b}) = {rho}");
        }
    }
}

#[test]
fn antithetic_pairs_reduce_european_variance() {
    let model = GbmModel::single_asset(100.0, 0.05, 0.02, 0.2).unwrap();
    let schedule = ExerciseSchedule::uniform(5, 1.0).unwrap();
    let payoff = PayoffSpec::new(PayoffKind::PutSingle, 100.0).unwrap();
    let n = 100_000;
    let payouts = |antithetic: bool| {
        let paths = generate_paths(&model, &schedule, n, 21, antithetic).unwrap();
        (0..n).map(|k| discounted_payout(&payoff, paths.state(k, 4), 1.0, 0.05)).collect::<Vec<_>>()
    };
    let paired = stats::standard_error(&payouts(true), true);
    let plain = stats::standard_error(&payouts(false), false);
    assert!(paired <= plain, "antithetic {paired} vs plain {plain}");
}

#[test]
fn generation_is_reproducible() {
    let model = GbmModel::symmetric(2, 100.0, 0.05, 0.1, 0.2, 0.0).unwrap();
    let schedule = ExerciseSchedule::uniform(9, 3.0).unwrap();
    let a = generate_paths(&model, &schedule, 1000, 77, true).unwrap();
    let b = generate_paths(&model, &schedule, 1000, 77, true).unwrap();
    let c = generate_paths(&model, &schedule, 1000, 78, true).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.values(), c.values());
}
