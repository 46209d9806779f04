//! The two studies: estimator comparison on repeated sets, and bias against
//! `M/N` on splits of one path pool.

use std::time::Instant;

use log::info;
use loolsm_core::contracts::{basis_family, BasisSpec, PayoffKind, PayoffSpec};
use loolsm_core::engine::{
    apply_control_variate, european_mc_price, price_backward_with, price_two_pass, BackwardMode, EngineOptions,
    Estimator, PricingResult,
};
use loolsm_core::market::{pool_block, ExerciseSchedule, PathGenerator, PathSet};
use loolsm_core::stats;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::pathio::load_paths;
use crate::reference::{exact_prices, ExactPrices};
use crate::report::{fit_bias_slope, ExperimentReport, Record, SlopePoint};
use crate::seed::{policy_seed, pool_seed, set_seed};

/// Paths per parallel generation task.
const GENERATION_CHUNK: usize = 2_000;

#[derive(Debug, Clone, Copy)]
struct Sample {
    price: f64,
    flips: Option<usize>,
    min_rank: Option<usize>,
    ms: u64,
}

struct Timer(Option<Instant>);

impl Timer {
    fn start(enabled: bool) -> Self {
        Timer(enabled.then(Instant::now))
    }

    fn ms(&self) -> u64 {
        self.0.map_or(0, |t| t.elapsed().as_millis() as u64)
    }
}

fn sample(result: &PricingResult, track_flips: bool, ms: u64) -> Sample {
    Sample {
        price: result.price,
        flips: (track_flips && !result.flip_counts.is_empty()).then(|| result.total_flips()),
        min_rank: result.min_rank(),
        ms,
    }
}

/// Mean, sample standard deviation and standard error of the mean; the
/// spread fields are `None` for a single value.
fn spread(values: &[f64]) -> (f64, Option<f64>, Option<f64>) {
    let mean = stats::mean(values);
    if values.len() < 2 {
        return (mean, None, None);
    }
    let std = stats::sample_std(values);
    (mean, Some(std), Some(std / (values.len() as f64).sqrt()))
}

fn backward_modes(estimators: &[Estimator]) -> Vec<BackwardMode> {
    estimators.iter().filter_map(|&e| BackwardMode::try_from(e).ok()).collect()
}

struct Case {
    payoff: PayoffSpec,
    schedule: ExerciseSchedule,
    generator: PathGenerator,
    exact: ExactPrices,
}

impl Case {
    fn new(config: &ExperimentConfig, key: f64) -> Result<Self> {
        let schedule = config.schedule()?;
        let generator =
            PathGenerator::new(&config.model(key)?, &schedule).map_err(|e| HarnessError::core("path generator", e))?;
        Ok(Case { payoff: config.payoff(key)?, schedule, generator, exact: exact_prices(config, key)? })
    }
}

fn basis(case: PayoffKind, m: usize) -> Result<BasisSpec> {
    basis_family(case, m).map_err(|e| HarnessError::Config(e.to_string()))
}

/// Prices `n_mc` independent sets per grid point with every requested
/// estimator on shared valuation paths, plus the European price.
pub fn run_experiment1(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let mut estimators = config.estimators.clone();
    estimators.push(Estimator::European);
    let modes = backward_modes(&estimators);
    let basis = basis(config.case, config.basis_m)?;
    let cases = config.keys.iter().map(|&key| Case::new(config, key)).collect::<Result<Vec<_>>>()?;
    info!("experiment 1: {} {} grid points x {} sets of {} paths", config.case, cases.len(), config.n_mc, config.paths);

    let cells: Vec<(usize, usize)> = (0..cases.len()).flat_map(|g| (0..config.n_mc).map(move |k| (g, k))).collect();
    let outcomes = cells
        .par_iter()
        .map(|&(g, k)| {
            let case = &cases[g];
            let context = || format!("{} key {} set {k}", config.case, config.keys[g]);
            let core = |e| HarnessError::core(context(), e);
            let seed = set_seed(config.base_seed, config.case, k as u64);
            let paths = case.generator.generate(config.paths, seed, config.antithetic).map_err(core)?;

            let timer = Timer::start(config.timing);
            let options = EngineOptions { track_flips: config.track_flips, trace: false };
            let runs = if modes.is_empty() {
                Vec::new()
            } else {
                price_backward_with(&paths, &case.payoff, &basis, &modes, options).map_err(core)?
            };
            let joint_ms = timer.ms();

            estimators
                .iter()
                .map(|&est| match est {
                    Estimator::Lsm | Estimator::Loolsm => {
                        let mode = BackwardMode::try_from(est).expect("backward mode");
                        let run = &runs[modes.iter().position(|&m| m == mode).expect("requested mode")];
                        Ok(sample(&run.result, config.track_flips, joint_ms))
                    }
                    Estimator::Lsm2 => {
                        let timer = Timer::start(config.timing);
                        let policy_seed = policy_seed(config.base_seed, config.case, k as u64);
                        let policy =
                            case.generator.generate(config.paths, policy_seed, config.antithetic).map_err(core)?;
                        let result = price_two_pass(&policy, &paths, &case.payoff, &basis).map_err(core)?;
                        Ok(sample(&result, false, timer.ms()))
                    }
                    Estimator::European => {
                        let timer = Timer::start(config.timing);
                        let result = european_mc_price(&paths, &case.payoff);
                        Ok(Sample { price: result.price, flips: None, min_rank: None, ms: timer.ms() })
                    }
                })
                .collect::<Result<Vec<Sample>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut report = ExperimentReport::default();
    let lsm_index = estimators.iter().position(|&e| e == Estimator::Lsm);
    for (g, case) in cases.iter().enumerate() {
        let sets = &outcomes[g * config.n_mc..(g + 1) * config.n_mc];
        for (e, &estimator) in estimators.iter().enumerate() {
            let prices: Vec<f64> = sets.iter().map(|s| s[e].price).collect();
            let exact = if estimator == Estimator::European { case.exact.european } else { case.exact.bermudan };
            let (mean, std, se_mean) = spread(&prices);
            let (mean_bias, bias_se) = match lsm_index {
                Some(l) if l != e && estimator != Estimator::European => {
                    let diffs: Vec<f64> = sets.iter().map(|s| s[l].price - s[e].price).collect();
                    let (m, _, se) = spread(&diffs);
                    (Some(m), se)
                }
                _ => (None, None),
            };
            let flips = sets.iter().map(|s| s[e].flips).collect::<Option<Vec<_>>>();
            report.records.push(Record {
                case: config.case,
                key: config.keys[g],
                estimator,
                m: config.basis_m,
                n: config.paths,
                n_mc: config.n_mc,
                mean_offset: mean - exact,
                std,
                se_mean,
                mean_bias,
                bias_se,
                flips_total: flips.map(|f| f.iter().sum()),
                min_rank: sets.iter().filter_map(|s| s[e].min_rank).min(),
                wall_ms: sets.iter().map(|s| s[e].ms).sum(),
            });
        }
    }
    report.notes.push(format!(
        "base seed {}; set k uses base ^ hash(case, k), LSM2 policy sets base ^ hash(case, k, \"policy\")",
        config.base_seed
    ));
    Ok(report)
}

/// Simulates the experiment-2 pool, generating chunks in parallel.
pub fn generate_pool(generator: &PathGenerator, n_paths: usize, seed: u64, antithetic: bool) -> PathSet {
    let len = generator.path_len();
    let mut values = vec![0.0; n_paths * len];
    values.par_chunks_mut(GENERATION_CHUNK * len).enumerate().for_each(|(c, chunk)| {
        generator.fill(seed, antithetic, c * GENERATION_CHUNK, chunk);
    });
    generator.assemble(values, seed, antithetic)
}

fn obtain_pool(config: &ExperimentConfig, case: &Case) -> Result<PathSet> {
    let Some(file) = &config.pool_file else {
        let seed = pool_seed(config.base_seed, config.case);
        return Ok(generate_pool(&case.generator, config.pool_size, seed, config.antithetic));
    };
    let pool = load_paths(file)?;
    let fits = pool.n_paths() == config.pool_size
        && pool.n_assets() == config.case.assets()
        && pool.times() == case.schedule.times()
        && pool.rate() == config.rate
        && (pool.antithetic() || !config.antithetic);
    if !fits {
        return Err(HarnessError::Config(format!(
            "{}: pool of {} paths on {} dates x {} assets does not match the configuration",
            file.display(),
            pool.n_paths(),
            pool.n_dates(),
            pool.n_assets()
        )));
    }
    Ok(pool)
}

#[derive(Debug, Clone, Copy)]
struct PairSample {
    lsm: Sample,
    loolsm: Sample,
}

/// Splits one pool into `n_mc` sets for every `n_mc` and `M`, prices each set
/// with LSM and LOOLSM, and fits the mean bias against `M/N`.
pub fn run_experiment2(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    if config.pool_file.is_some() && config.case == PayoffKind::BestOfCall && config.convergence_keys.len() > 1 {
        return Err(HarnessError::Config("a pool file fixes the initial spot; give a single convergence key".into()));
    }
    let bases = config.basis_m_list.iter().map(|&m| basis(config.case, m)).collect::<Result<Vec<_>>>()?;
    let mut report = ExperimentReport::default();
    for &key in &config.convergence_keys {
        let case = Case::new(config, key)?;
        let pool = obtain_pool(config, &case)?;
        info!("experiment 2: {} key {key}, pool of {} paths", config.case, pool.n_paths());

        let cells: Vec<(usize, usize, usize)> = (0..bases.len())
            .flat_map(|b| {
                config.n_mc_list.iter().enumerate().flat_map(move |(s, &n_mc)| (0..n_mc).map(move |k| (b, s, k)))
            })
            .collect();
        let samples = cells
            .par_iter()
            .map(|&(b, s, k)| {
                let n_mc = config.n_mc_list[s];
                let core =
                    |e| HarnessError::core(format!("{} key {key} M {} set {k}/{n_mc}", config.case, bases[b].len()), e);
                let set = pool_block(&pool, n_mc, k).map_err(core)?;
                let timer = Timer::start(config.timing);
                let options = EngineOptions { track_flips: config.track_flips, trace: false };
                let runs = price_backward_with(
                    &set,
                    &case.payoff,
                    &bases[b],
                    &[BackwardMode::Lsm, BackwardMode::Loolsm],
                    options,
                )
                .map_err(core)?;
                let ms = timer.ms();
                let euro = european_mc_price(&set, &case.payoff);
                let adjust = |r: &PricingResult| {
                    if config.control_variate {
                        apply_control_variate(r, case.exact.european, &euro).map_err(core)
                    } else {
                        Ok(r.clone())
                    }
                };
                let (lsm, loolsm) = (adjust(&runs[0].result)?, adjust(&runs[1].result)?);
                Ok(PairSample {
                    lsm: sample(&lsm, config.track_flips, ms),
                    loolsm: sample(&loolsm, config.track_flips, ms),
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let mut points = Vec::new();
        let mut cursor = 0;
        for basis in &bases {
            for &n_mc in &config.n_mc_list {
                let sets = &samples[cursor..cursor + n_mc];
                cursor += n_mc;
                let n = config.pool_size / n_mc;
                let diffs: Vec<f64> = sets.iter().map(|p| p.lsm.price - p.loolsm.price).collect();
                let (bias, _, bias_se) = spread(&diffs);
                for (estimator, pick) in [
                    (Estimator::Lsm, (|p: &PairSample| p.lsm) as fn(&PairSample) -> Sample),
                    (Estimator::Loolsm, |p: &PairSample| p.loolsm),
                ] {
                    let picked: Vec<Sample> = sets.iter().map(pick).collect();
                    let prices: Vec<f64> = picked.iter().map(|s| s.price).collect();
                    let (mean, std, se_mean) = spread(&prices);
                    let is_loo = estimator == Estimator::Loolsm;
                    report.records.push(Record {
                        case: config.case,
                        key,
                        estimator,
                        m: basis.len(),
                        n,
                        n_mc,
                        mean_offset: mean - case.exact.bermudan,
                        std,
                        se_mean,
                        mean_bias: is_loo.then_some(bias),
                        bias_se: if is_loo { bias_se } else { None },
                        flips_total: picked.iter().map(|s| s.flips).sum(),
                        min_rank: picked.iter().filter_map(|s| s.min_rank).min(),
                        wall_ms: picked.iter().map(|s| s.ms).sum(),
                    });
                }
                if let Some(se) = bias_se.filter(|se| *se > 0.0) {
                    points.push(SlopePoint { x: basis.len() as f64 / n as f64, y: bias, w: 1.0 / (se * se) });
                }
            }
        }
        match fit_bias_slope(&points) {
            Ok(fit) => report.slopes.push((key, fit)),
            Err(e) => report.notes.push(format!("key {key}: no slope fit ({e})")),
        }
    }
    report.notes.push(format!(
        "one pool per grid point (seed base ^ hash(case, 0, \"pool\")) shared across every M and n_mc split; control variate {}",
        if config.control_variate { "on" } else { "off" }
    ));
    Ok(report)
}
