use loolsm_core::contracts::PayoffKind;
use loolsm_core::engine::Estimator;
use loolsm_core::market::PathGenerator;
use loolsm_harness::pathio::dump_paths;
use loolsm_harness::report::{read_csv, write_csv, CSV_HEADER};
use loolsm_harness::seed::pool_seed;
use loolsm_harness::{
    emit_csv, generate_pool, parse_csv, run_experiment1, run_experiment2, ExperimentConfig, ExperimentReport, Scale,
};

fn small_put() -> ExperimentConfig {
    let mut c = ExperimentConfig::defaults(PayoffKind::PutSingle, Scale::Desk);
    c.paths = 2_000;
    c.n_mc = 3;
    c.pool_size = 12_000;
    c.n_mc_list = vec![2, 4, 6];
    c
}

fn csv_bytes(report: &ExperimentReport) -> Vec<u8> {
    let mut out = Vec::new();
    write_csv(report, &mut out).unwrap();
    out
}

#[test]
fn single_set_gives_one_row_per_estimator() {
    let mut c = small_put();
    c.keys = vec![100.0];
    c.n_mc = 1;
    let report = run_experiment1(&c).unwrap();
    let names: Vec<_> = report.records.iter().map(|r| r.estimator).collect();
    assert_eq!(names, [Estimator::Lsm, Estimator::Lsm2, Estimator::Loolsm, Estimator::European]);
    for r in &report.records {
        assert_eq!((r.std, r.se_mean, r.bias_se), (None, None, None));
        assert_eq!(r.n_mc, 1);
    }
    assert!(report.records[0].mean_bias.is_none());
    assert!(report.records[2].mean_bias.is_some());
    assert!(report.records[3].mean_bias.is_none() && report.records[3].flips_total.is_none());
}

#[test]
fn full_strike_grid_shape() {
    let report = run_experiment1(&small_put()).unwrap();
    assert_eq!(report.records.len(), 5 * 3 + 5);
    assert_eq!(report.records.iter().filter(|r| r.estimator == Estimator::European).count(), 5);
    // European offsets are measured against the European price, and small
    let euro: Vec<_> = report.records.iter().filter(|r| r.estimator == Estimator::European).collect();
    for r in euro {
        assert!(r.mean_offset.abs() < 4.0 * r.se_mean.unwrap() + 0.05, "{r:?}");
    }
    for r in report.records.iter().filter(|r| r.estimator == Estimator::Loolsm) {
        assert_eq!(r.min_rank, Some(5));
        assert!(r.flips_total.is_some());
    }
}

#[test]
fn empty_report_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    emit_csv(&ExperimentReport::default(), &path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), format!("{CSV_HEADER}\n"));
    assert!(parse_csv(&path).unwrap().is_empty());
}

#[test]
fn csv_round_trip() {
    let report = run_experiment1(&small_put()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("e1.csv");
    emit_csv(&report, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(!text.contains('\r'));
    for line in text.lines().skip(1) {
        let fields: Vec<_> = line.split(',').collect();
        assert!(fields[3..].iter().all(|f| !f.contains(['e', 'E'])), "{line}");
    }
    let parsed = parse_csv(&path).unwrap();
    assert_eq!(parsed.len(), report.records.len());
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs()) || a == b;
    let opt_close = |a: Option<f64>, b: Option<f64>| match (a, b) {
        (Some(a), Some(b)) => close(a, b),
        (a, b) => a.is_none() && b.is_none(),
    };
    for (p, r) in parsed.iter().zip(&report.records) {
        assert_eq!((p.case, p.key, p.estimator, p.m, p.n, p.n_mc), (r.case, r.key, r.estimator, r.m, r.n, r.n_mc));
        assert!(close(p.mean_offset, r.mean_offset));
        assert!(opt_close(p.std, r.std) && opt_close(p.se_mean, r.se_mean));
        assert!(opt_close(p.mean_bias, r.mean_bias) && opt_close(p.bias_se, r.bias_se));
        assert_eq!((p.flips_total, p.min_rank, p.wall_ms), (r.flips_total, r.min_rank, r.wall_ms));
    }
    // a second pass through the text is exact
    let again = ExperimentReport { records: parsed, ..Default::default() };
    assert_eq!(csv_bytes(&again), text.as_bytes());
}

#[test]
fn rejects_malformed_csv() {
    assert!(read_csv("case,key\nput,1\n".as_bytes()).unwrap_err().contains("header"));
    let bad = format!("{CSV_HEADER}\nput,100,LSM9,5,10,1,0,,,,,,,0\n");
    assert!(read_csv(bad.as_bytes()).unwrap_err().contains("LSM9"));
}

#[test]
fn reports_are_byte_reproducible_across_thread_counts() {
    let mut c = small_put();
    c.keys = vec![90.0, 110.0];
    let run = |threads: usize, f: fn(&ExperimentConfig) -> loolsm_harness::Result<ExperimentReport>| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        csv_bytes(&pool.install(|| f(&c)).unwrap())
    };
    assert_eq!(run(1, run_experiment1), run(3, run_experiment1));
    assert_eq!(run(1, run_experiment1), run(1, run_experiment1));
    assert_eq!(run(1, run_experiment2), run(4, run_experiment2));
}

#[test]
fn control_variate_leaves_the_bias_alone() {
    let mut c = ExperimentConfig::defaults(PayoffKind::BasketCall, Scale::Desk);
    c.pool_size = 16_000;
    c.n_mc_list = vec![10, 20];
    let with = run_experiment2(&c).unwrap();
    c.control_variate = false;
    let without = run_experiment2(&c).unwrap();
    for (a, b) in with.records.iter().zip(&without.records) {
        assert_eq!((a.m, a.n, a.estimator), (b.m, b.n, b.estimator));
        match (a.mean_bias, b.mean_bias) {
            (Some(x), Some(y)) => assert!((x - y).abs() <= 1e-12, "{x} vs {y}"),
            (x, y) => assert_eq!(x, y),
        }
        assert_eq!(a.bias_se.is_some(), b.bias_se.is_some());
        assert_ne!(a.mean_offset, b.mean_offset);
    }
}

#[test]
fn control_variate_tightens_basket_prices() {
    // With the linear basis the exercise policy is accurate and the set prices
    // move with the European price; larger bases add regression noise of
    // their own at these sizes.
    let mut c = ExperimentConfig::defaults(PayoffKind::BasketCall, Scale::Desk);
    c.basis_m_list = vec![6];
    c.n_mc_list = vec![10, 40];
    let with = run_experiment2(&c).unwrap();
    c.control_variate = false;
    let without = run_experiment2(&c).unwrap();
    for (a, b) in with.records.iter().zip(&without.records) {
        assert!(a.std.unwrap() < b.std.unwrap(), "{a:?} vs {b:?}");
    }
}

#[test]
fn loaded_pool_matches_simulated_pool() {
    let c = small_put();
    let generator = PathGenerator::new(&c.model(80.0).unwrap(), &c.schedule().unwrap()).unwrap();
    let pool = generate_pool(&generator, c.pool_size, pool_seed(c.base_seed, c.case), true);
    assert_eq!(pool, generator.generate(c.pool_size, pool_seed(c.base_seed, c.case), true).unwrap());

    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("pool.bin");
    dump_paths(&pool, &file).unwrap();
    let mut loaded = c.clone();
    loaded.pool_file = Some(file);
    assert_eq!(run_experiment2(&c).unwrap(), run_experiment2(&loaded).unwrap());

    loaded.pool_size = 6_000;
    loaded.n_mc_list = vec![2];
    assert!(run_experiment2(&loaded).unwrap_err().to_string().contains("does not match"));
}

#[test]
fn experiment2_layout() {
    let report = run_experiment2(&small_put()).unwrap();
    // 3 M values x 3 splits x (LSM, LOOLSM)
    assert_eq!(report.records.len(), 18);
    assert_eq!(report.slopes.len(), 1);
    for r in &report.records {
        assert_eq!(r.n * r.n_mc, 12_000);
        assert_eq!(r.key, 80.0);
    }
    assert!(report.notes.iter().any(|n| n.contains("shared across every M")));
}

#[test]
fn off_grid_basket_is_rejected() {
    let mut c = ExperimentConfig::defaults(PayoffKind::BasketCall, Scale::Desk);
    c.keys = vec![95.0];
    c.paths = 200;
    c.n_mc = 2;
    assert!(run_experiment1(&c).unwrap_err().to_string().contains("no reference price"));
}
