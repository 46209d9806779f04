//! Experiment configuration and its TOML form.
//!
//! Every field is optional in the file. Missing fields take the published
//! parameters of the chosen case at the chosen scale.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use loolsm_core::contracts::{basis_family, PayoffKind, PayoffSpec};
use loolsm_core::engine::Estimator;
use loolsm_core::market::{ExerciseSchedule, GbmModel};
use serde::Deserialize;

use crate::error::{HarnessError, Result};

/// Sizes of the repeated-set experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scale {
    /// Pool of 144,000 paths and 20 sets per grid point.
    #[default]
    Desk,
    /// Pool of 1,440,000 paths and 100 sets per grid point.
    Paper,
}

impl FromStr for Scale {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "desk" => Ok(Scale::Desk),
            "paper" => Ok(Scale::Paper),
            other => Err(HarnessError::Config(format!("unknown scale `{other}` (expected desk or paper)"))),
        }
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scale::Desk => "desk",
            Scale::Paper => "paper",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub case: PayoffKind,
    /// Strikes (put, basket) or initial spots (best-of) of experiment 1.
    pub keys: Vec<f64>,
    /// Grid points of experiment 2.
    pub convergence_keys: Vec<f64>,
    /// Initial spot when the grid runs over strikes.
    pub spot: f64,
    /// Strike when the grid runs over spots.
    pub strike: f64,
    pub rate: f64,
    pub dividend: f64,
    pub vol: f64,
    pub correlation: f64,
    pub maturity: f64,
    pub dates: usize,
    pub estimators: Vec<Estimator>,
    /// Paths per set in experiment 1.
    pub paths: usize,
    /// Sets per grid point in experiment 1.
    pub n_mc: usize,
    /// Pool splits of experiment 2.
    pub n_mc_list: Vec<usize>,
    pub basis_m: usize,
    pub basis_m_list: Vec<usize>,
    pub base_seed: u64,
    pub pool_size: usize,
    pub antithetic: bool,
    /// European control variate in experiment 2.
    pub control_variate: bool,
    pub track_flips: bool,
    /// Record wall-clock times; off keeps reports byte-reproducible.
    pub timing: bool,
    pub output: Option<PathBuf>,
    /// Path pool dump to reuse in experiment 2 instead of simulating.
    pub pool_file: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Published parameters of `case` at `scale`.
    pub fn defaults(case: PayoffKind, scale: Scale) -> Self {
        let (pool_size, n_mc, n_mc_list) = match scale {
            Scale::Desk => (144_000, 20, vec![10, 40, 120]),
            Scale::Paper => (1_440_000, 100, vec![10, 20, 30, 40, 60, 120, 240, 720]),
        };
        let base = ExperimentConfig {
            case,
            keys: Vec::new(),
            convergence_keys: Vec::new(),
            spot: 100.0,
            strike: 100.0,
            rate: 0.05,
            dividend: 0.02,
            vol: 0.2,
            correlation: 0.0,
            maturity: 1.0,
            dates: 5,
            estimators: vec![Estimator::Lsm, Estimator::Lsm2, Estimator::Loolsm],
            paths: 40_000,
            n_mc,
            n_mc_list,
            basis_m: 5,
            basis_m_list: vec![4, 8, 12],
            base_seed: 20_190_424,
            pool_size,
            antithetic: true,
            control_variate: true,
            track_flips: true,
            timing: false,
            output: None,
            pool_file: None,
        };
        match case {
            PayoffKind::PutSingle => {
                ExperimentConfig { keys: vec![80.0, 90.0, 100.0, 110.0, 120.0], convergence_keys: vec![80.0], ..base }
            }
            PayoffKind::BestOfCall => ExperimentConfig {
                keys: vec![90.0, 100.0, 110.0],
                convergence_keys: vec![100.0],
                dividend: 0.1,
                maturity: 3.0,
                dates: 9,
                basis_m: 11,
                basis_m_list: vec![4, 7, 11],
                ..base
            },
            PayoffKind::BasketCall => ExperimentConfig {
                keys: vec![60.0, 80.0, 100.0, 120.0, 140.0],
                convergence_keys: vec![100.0],
                rate: 0.0,
                dividend: 0.0,
                vol: 0.4,
                correlation: 0.5,
                maturity: 5.0,
                dates: 10,
                basis_m: 16,
                basis_m_list: vec![6, 10, 16],
                ..base
            },
        }
    }

    /// Reads a TOML file on top of the defaults for its `case` at `scale`.
    pub fn load(path: &Path, scale: Scale) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml(&text, scale).map_err(|e| match e {
            HarnessError::Config(msg) => HarnessError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn from_toml(text: &str, scale: Scale) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        let case = raw
            .case
            .as_deref()
            .ok_or_else(|| HarnessError::Config("missing `case`".into()))?
            .parse::<PayoffKind>()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        let mut config = Self::defaults(case, scale);
        raw.apply(&mut config)?;
        config.validate()?;
        Ok(config)
    }

    /// Checks the invariants both experiments rely on.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.keys.is_empty() && self.convergence_keys.is_empty() {
            return bad("no grid points".into());
        }
        if self.paths == 0 || (self.antithetic && self.paths % 2 != 0) {
            return bad(format!("paths = {} must be positive and even with antithetic pairs", self.paths));
        }
        if self.n_mc == 0 {
            return bad("n_mc must be positive".into());
        }
        for &sets in &self.n_mc_list {
            if sets == 0 || self.pool_size % sets != 0 {
                return bad(format!("pool_size = {} is not divisible by n_mc = {sets}", self.pool_size));
            }
            if self.antithetic && (self.pool_size / sets) % 2 != 0 {
                return bad(format!("n_mc = {sets} leaves an odd set size under antithetic pairing"));
            }
        }
        for &m in std::iter::once(&self.basis_m).chain(&self.basis_m_list) {
            basis_family(self.case, m).map_err(|e| HarnessError::Config(e.to_string()))?;
        }
        if self.estimators.contains(&Estimator::European) {
            return bad("EUROPEAN is always reported; list only LSM, LSM2 and LOOLSM".into());
        }
        self.schedule()?;
        for &key in self.keys.iter().chain(&self.convergence_keys) {
            self.model(key)?;
            self.payoff(key)?;
        }
        Ok(())
    }

    pub fn schedule(&self) -> Result<ExerciseSchedule> {
        ExerciseSchedule::uniform(self.dates, self.maturity).map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// Market model at grid point `key`.
    pub fn model(&self, key: f64) -> Result<GbmModel> {
        let spot = if self.case == PayoffKind::BestOfCall { key } else { self.spot };
        GbmModel::symmetric(self.case.assets(), spot, self.rate, self.dividend, self.vol, self.correlation)
            .map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// Payoff at grid point `key`.
    pub fn payoff(&self, key: f64) -> Result<PayoffSpec> {
        let strike = if self.case == PayoffKind::BestOfCall { self.strike } else { key };
        PayoffSpec::new(self.case, strike).map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// True when the model parameters are the published ones, so the
    /// published reference prices apply.
    pub fn has_published_parameters(&self) -> bool {
        let paper = Self::defaults(self.case, Scale::Desk);
        let grid_fixed =
            if self.case == PayoffKind::BestOfCall { self.strike == paper.strike } else { self.spot == paper.spot };
        grid_fixed
            && self.rate == paper.rate
            && self.dividend == paper.dividend
            && self.vol == paper.vol
            && self.correlation == paper.correlation
            && self.maturity == paper.maturity
            && self.dates == paper.dates
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    case: Option<String>,
    keys: Option<Vec<f64>>,
    convergence_keys: Option<Vec<f64>>,
    spot: Option<f64>,
    strike: Option<f64>,
    rate: Option<f64>,
    dividend: Option<f64>,
    vol: Option<f64>,
    correlation: Option<f64>,
    maturity: Option<f64>,
    dates: Option<usize>,
    estimators: Option<Vec<String>>,
    paths: Option<usize>,
    n_mc: Option<usize>,
    n_mc_list: Option<Vec<usize>>,
    basis_m: Option<usize>,
    basis_m_list: Option<Vec<usize>>,
    base_seed: Option<u64>,
    pool_size: Option<usize>,
    antithetic: Option<bool>,
    control_variate: Option<bool>,
    track_flips: Option<bool>,
    timing: Option<bool>,
    output: Option<PathBuf>,
    pool_file: Option<PathBuf>,
}

impl RawConfig {
    fn apply(self, c: &mut ExperimentConfig) -> Result<()> {
        macro_rules! take {
            ($($field:ident),*) => { $( if let Some(v) = self.$field { c.$field = v; } )* };
        }
        take!(
            keys,
            convergence_keys,
            spot,
            strike,
            rate,
            dividend,
            vol,
            correlation,
            maturity,
            dates,
            paths,
            n_mc,
            n_mc_list,
            basis_m,
            basis_m_list,
            base_seed,
            pool_size,
            antithetic,
            control_variate,
            track_flips,
            timing
        );
        if let Some(names) = self.estimators {
            c.estimators = names
                .iter()
                .map(|n| Estimator::parse(n).ok_or_else(|| HarnessError::Config(format!("unknown estimator `{n}`"))))
                .collect::<Result<_>>()?;
        }
        if self.output.is_some() {
            c.output = self.output;
        }
        if self.pool_file.is_some() {
            c.pool_file = self.pool_file;
        }
        Ok(())
    }
}
