use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use loolsm_core::contracts::{basis_family, PayoffKind};
use loolsm_core::engine::{european_mc_price, price_backward, price_two_pass, BackwardMode, Estimator};
use loolsm_core::market::PathGenerator;
use loolsm_core::oracles::{bestof2_european_call, binomial_bermudan_put, bs_european_put, reference_price};
use loolsm_harness::pathio::dump_paths;
use loolsm_harness::report::write_csv;
use loolsm_harness::seed::{policy_seed, pool_seed};
use loolsm_harness::{
    emit_csv, generate_pool, run_experiment1, run_experiment2, ExperimentConfig, ExperimentReport, HarnessError,
    Result, Scale,
};

#[derive(Parser)]
#[command(name = "loolsm", version, about = "Bermudan option pricing with leave-one-out least-squares Monte Carlo")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Price one option with one estimator.
    Price(PriceArgs),
    /// Estimator comparison over repeated independent sets.
    Experiment1(ExperimentArgs),
    /// Look-ahead bias against M/N on splits of one path pool.
    Experiment2(ExperimentArgs),
    /// Reference prices for a grid point.
    Oracle {
        #[arg(long)]
        case: PayoffKind,
        /// Strike (put, basket) or initial spot (best-of).
        #[arg(long)]
        key: f64,
    },
    /// Simulate the experiment-2 pool and write it as a binary dump.
    Pool {
        #[command(flatten)]
        source: ConfigSource,
        /// Grid point; defaults to the first convergence key.
        #[arg(long)]
        key: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct PriceArgs {
    #[arg(long)]
    case: PayoffKind,
    /// LSM, LSM2, LOOLSM or EUROPEAN.
    #[arg(long, default_value = "LOOLSM")]
    mode: String,
    #[arg(long)]
    strike: Option<f64>,
    #[arg(long)]
    spot: Option<f64>,
    #[arg(long, default_value_t = 40_000)]
    paths: usize,
    #[arg(long)]
    basis_m: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct ConfigSource {
    /// TOML configuration; fields it omits take the published defaults.
    #[arg(long, required_unless_present = "case")]
    config: Option<PathBuf>,
    /// Run the published defaults of this case without a configuration file.
    #[arg(long, conflicts_with = "config")]
    case: Option<PayoffKind>,
    #[arg(long, default_value = "desk")]
    scale: Scale,
}

impl ConfigSource {
    fn load(&self) -> Result<ExperimentConfig> {
        match (&self.config, self.case) {
            (Some(path), _) => ExperimentConfig::load(path, self.scale),
            (None, Some(case)) => Ok(ExperimentConfig::defaults(case, self.scale)),
            (None, None) => Err(HarnessError::Config("give --config or --case".into())),
        }
    }
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(flatten)]
    source: ConfigSource,
    /// CSV output; defaults to the configured output, then standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// Record wall-clock times in the report.
    #[arg(long)]
    timing: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Price(args) => price(args),
        Command::Experiment1(args) => experiment(args, run_experiment1),
        Command::Experiment2(args) => experiment(args, run_experiment2),
        Command::Oracle { case, key } => oracle(case, key),
        Command::Pool { source, key, out } => {
            let config = source.load()?;
            let key = key
                .or(config.convergence_keys.first().copied())
                .ok_or_else(|| HarnessError::Config("no convergence key to simulate".into()))?;
            let generator = PathGenerator::new(&config.model(key)?, &config.schedule()?)
                .map_err(|e| HarnessError::core("path generator", e))?;
            let pool = generate_pool(
                &generator,
                config.pool_size,
                pool_seed(config.base_seed, config.case),
                config.antithetic,
            );
            dump_paths(&pool, &out)
        }
    }
}

fn experiment(args: ExperimentArgs, runner: fn(&ExperimentConfig) -> Result<ExperimentReport>) -> Result<()> {
    let mut config = args.source.load()?;
    config.timing |= args.timing;
    let report = match args.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?
            .install(|| runner(&config))?,
        None => runner(&config)?,
    };
    for note in &report.notes {
        log::info!("{note}");
    }
    for (key, fit) in &report.slopes {
        log::info!(
            "key {key}: bias = {:.6} (+/- {:.6}) M/N + {:.3e} (+/- {:.3e}), r2 {:.4}",
            fit.slope,
            fit.slope_se,
            fit.intercept,
            fit.intercept_se,
            fit.r2
        );
    }
    match args.out.or(config.output) {
        Some(path) => emit_csv(&report, &path),
        None => write_csv(&report, io::stdout().lock()).map_err(|e| HarnessError::io("<stdout>", e)),
    }
}

fn price(args: PriceArgs) -> Result<()> {
    let mode =
        Estimator::parse(&args.mode).ok_or_else(|| HarnessError::Config(format!("unknown mode `{}`", args.mode)))?;
    let mut config = ExperimentConfig::defaults(args.case, Scale::Desk);
    if let Some(m) = args.basis_m {
        config.basis_m = m;
    }
    let key = match args.case {
        PayoffKind::BestOfCall => {
            if let Some(k) = args.strike {
                config.strike = k;
            }
            args.spot.unwrap_or(100.0)
        }
        _ => {
            if let Some(s) = args.spot {
                config.spot = s;
            }
            args.strike.unwrap_or(100.0)
        }
    };
    config.paths = args.paths;
    config.keys = vec![key];
    config.validate()?;
    let core = |e| HarnessError::core(format!("{} {key}", args.case), e);
    let generator = PathGenerator::new(&config.model(key)?, &config.schedule()?).map_err(core)?;
    let payoff = config.payoff(key)?;
    let basis = basis_family(args.case, config.basis_m).map_err(|e| HarnessError::Config(e.to_string()))?;
    let paths = generator.generate(args.paths, args.seed, true).map_err(core)?;
    let result = match mode {
        Estimator::European => european_mc_price(&paths, &payoff),
        Estimator::Lsm2 => {
            let policy = generator.generate(args.paths, policy_seed(args.seed, args.case, 0), true).map_err(core)?;
            price_two_pass(&policy, &paths, &payoff, &basis).map_err(core)?
        }
        _ => price_backward(&paths, &payoff, &basis, BackwardMode::try_from(mode).map_err(core)?).map_err(core)?.0,
    };
    let mut out = io::stdout().lock();
    let write =
        |out: &mut io::StdoutLock, line: String| writeln!(out, "{line}").map_err(|e| HarnessError::io("<stdout>", e));
    write(&mut out, format!("case {} key {key} mode {mode} N {} M {}", args.case, args.paths, basis.len()))?;
    write(&mut out, format!("price {:.6} std_error {:.6}", result.price, result.std_error))?;
    if let Some(rank) = result.min_rank() {
        write(&mut out, format!("min_rank {rank} flips {} fallbacks {}", result.total_flips(), result.fallback_count))?;
    }
    Ok(())
}

fn oracle(case: PayoffKind, key: f64) -> Result<()> {
    let config = ExperimentConfig::defaults(case, Scale::Desk);
    let model = config.model(key)?;
    let payoff = config.payoff(key)?;
    let core = |e| HarnessError::core(format!("{case} {key}"), e);
    let mut lines = Vec::new();
    match reference_price(case, key) {
        Ok(p) => lines.push(format!("published bermudan {:.3} european {:.3}", p.bermudan, p.european)),
        Err(e) => lines.push(format!("published: {e}")),
    }
    match case {
        PayoffKind::PutSingle => {
            let schedule = config.schedule()?;
            let tree = binomial_bermudan_put(&model, &schedule, payoff.strike(), 50_000).map_err(core)?;
            let bs = bs_european_put(
                config.spot,
                config.vol,
                config.rate,
                config.dividend,
                payoff.strike(),
                config.maturity,
            );
            lines.push(format!("binomial bermudan {tree:.6} (50000 steps)"));
            lines.push(format!("black-scholes european {bs:.6}"));
        }
        PayoffKind::BestOfCall => {
            let euro = bestof2_european_call(&model, payoff.strike(), config.maturity).map_err(core)?;
            lines.push(format!("analytic european {euro:.6}"));
        }
        PayoffKind::BasketCall => {}
    }
    let mut out = io::stdout().lock();
    for line in lines {
        writeln!(out, "{case} {key}: {line}").map_err(|e| HarnessError::io("<stdout>", e))?;
    }
    Ok(())
}
