//! Backward-induction pricing: LSM, LOOLSM, two-pass LSM and European Monte
//! Carlo, plus the control-variate adjustment and look-ahead bias accounting.
//!
//! Exercise date indices are 0-based here: index `I - 1` is the maturity,
//! where the option is always exercised, and no decision is taken at time 0.
//! Regressions therefore happen on indices `0 .. I - 1`, and per-date vectors
//! such as [`PricingResult::ranks`] have length `I - 1`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::contracts::{discounted_payout, BasisSpec, PayoffSpec};
use crate::market::PathSet;
use crate::regression::{DesignMatrix, Factorization};
use crate::stats;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Estimator {
    Lsm,
    Lsm2,
    Loolsm,
    European,
}

impl Estimator {
    pub fn name(self) -> &'static str {
        match self {
            Estimator::Lsm => "LSM",
            Estimator::Lsm2 => "LSM2",
            Estimator::Loolsm => "LOOLSM",
            Estimator::European => "EUROPEAN",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().replace('-', "").as_str() {
            "LSM" => Some(Estimator::Lsm),
            "LSM2" => Some(Estimator::Lsm2),
            "LOOLSM" => Some(Estimator::Loolsm),
            "EUROPEAN" | "EURO" => Some(Estimator::European),
            _ => None,
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Decision rule of a single backward induction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BackwardMode {
    /// Decide with the fitted continuation value `C`.
    Lsm,
    /// Decide with the leave-one-out prediction `C'`.
    Loolsm,
}

impl From<BackwardMode> for Estimator {
    fn from(mode: BackwardMode) -> Self {
        match mode {
            BackwardMode::Lsm => Estimator::Lsm,
            BackwardMode::Loolsm => Estimator::Loolsm,
        }
    }
}

impl TryFrom<Estimator> for BackwardMode {
    type Error = Error;

    fn try_from(e: Estimator) -> Result<Self> {
        match e {
            Estimator::Lsm => Ok(BackwardMode::Lsm),
            Estimator::Loolsm => Ok(BackwardMode::Loolsm),
            _ => Err(Error::InvalidMode("backward induction runs LSM or LOOLSM only")),
        }
    }
}

/// Identifies the path set a result was valued on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Provenance {
    pub seed: u64,
    pub pool_offset: usize,
    pub n_paths: usize,
    pub antithetic: bool,
}

impl Provenance {
    pub fn of(paths: &PathSet) -> Self {
        Self {
            seed: paths.seed(),
            pool_offset: paths.pool_offset(),
            n_paths: paths.n_paths(),
            antithetic: paths.antithetic(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PricingResult {
    /// Mean of `per_path_value`.
    pub price: f64,
    pub per_path_value: Vec<f64>,
    pub std_error: f64,
    pub mode: Estimator,
    /// Regression rank per decision date.
    pub ranks: Vec<usize>,
    /// Paths where `1 - h` fell below the leverage threshold and `C' = C` was used.
    pub fallback_count: usize,
    /// Paths per decision date where the LSM and LOOLSM decisions differ.
    pub flip_counts: Vec<usize>,
    pub provenance: Provenance,
}

impl PricingResult {
    fn from_values(values: Vec<f64>, mode: Estimator, paths: &PathSet) -> Self {
        Self {
            price: stats::mean(&values),
            std_error: stats::standard_error(&values, paths.antithetic()),
            per_path_value: values,
            mode,
            ranks: Vec::new(),
            fallback_count: 0,
            flip_counts: Vec::new(),
            provenance: Provenance::of(paths),
        }
    }

    pub fn total_flips(&self) -> usize {
        self.flip_counts.iter().sum()
    }

    pub fn min_rank(&self) -> Option<usize> {
        self.ranks.iter().copied().min()
    }
}

/// Regression coefficients per decision date.
#[derive(Debug, Clone, PartialEq)]
pub struct ExercisePolicy {
    pub coefficients: Vec<Vec<f64>>,
    pub basis: BasisSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineOptions {
    /// Also compute `C'` in LSM mode to count decision flips.
    pub track_flips: bool,
    /// Keep per-date regression vectors in [`BackwardRun::trace`].
    pub trace: bool,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self { track_flips: true, trace: false }
    }
}

/// Regression quantities of one decision date.
#[derive(Debug, Clone, PartialEq)]
pub struct DateTrace {
    pub date: usize,
    pub rank: usize,
    /// Discounted payout `Z`.
    pub payout: Vec<f64>,
    /// Regression target `V` (value from the next date on).
    pub next_value: Vec<f64>,
    /// Full-regression continuation value `C`.
    pub fitted: Vec<f64>,
    /// Leave-one-out continuation value `C'`.
    pub loo: Vec<f64>,
    pub leverage: Vec<f64>,
    pub fallback: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackwardRun {
    pub result: PricingResult,
    pub policy: ExercisePolicy,
    /// Ordered from the last decision date backwards; empty unless requested.
    pub trace: Vec<DateTrace>,
}

/// Continue iff `c >= z`, and always when a nonnegative payoff pays nothing.
pub fn decide_continue(z: f64, c: f64, nonnegative: bool) -> bool {
    c >= z || (nonnegative && z == 0.0)
}

fn check_inputs(paths: &PathSet, payoff: &PayoffSpec, basis: &BasisSpec) -> Result<()> {
    if paths.n_assets() < payoff.assets() {
        return Err(Error::Shape(alloc::format!(
            "payoff reads {} assets but paths carry {}",
            payoff.assets(),
            paths.n_assets()
        )));
    }
    if basis.case() != payoff.kind() {
        return Err(Error::Shape(alloc::format!(
            "basis built for {} used with a {} payoff",
            basis.case(),
            payoff.kind()
        )));
    }
    Ok(())
}

fn payout_matrix(paths: &PathSet, payoff: &PayoffSpec) -> Vec<Vec<f64>> {
    paths
        .times()
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let discount = libm::exp(-paths.rate() * t);
            (0..paths.n_paths()).map(|n| discount * payoff.payout(paths.state(n, i))).collect()
        })
        .collect()
}

fn design_at(paths: &PathSet, basis: &BasisSpec, payout: &[f64], date: usize) -> Result<DesignMatrix> {
    DesignMatrix::from_fn(paths.n_paths(), basis.len(), |n, row| basis.fill_row(paths.state(n, date), payout[n], row))
}

/// Prices by regression-based backward induction in one mode.
pub fn price_backward(
    paths: &PathSet,
    payoff: &PayoffSpec,
    basis: &BasisSpec,
    mode: BackwardMode,
) -> Result<(PricingResult, ExercisePolicy)> {
    let run =
        price_backward_with(paths, payoff, basis, &[mode], EngineOptions::default())?.pop().expect("one run per mode");
    Ok((run.result, run.policy))
}

/// Runs several modes on the same paths, factoring each date's design once.
///
/// The inductions are independent: every mode regresses its own value vector.
pub fn price_backward_with(
    paths: &PathSet,
    payoff: &PayoffSpec,
    basis: &BasisSpec,
    modes: &[BackwardMode],
    options: EngineOptions,
) -> Result<Vec<BackwardRun>> {
    check_inputs(paths, payoff, basis)?;
    let n = paths.n_paths();
    let dates = paths.n_dates();
    if n <= basis.len() {
        log::warn!("{n} paths for {} basis functions; regressions interpolate", basis.len());
    }
    let payout = payout_matrix(paths, payoff);
    let nonnegative = payoff.nonnegative();

    struct State {
        mode: BackwardMode,
        values: Vec<f64>,
        coefficients: Vec<Vec<f64>>,
        ranks: Vec<usize>,
        flips: Vec<usize>,
        fallback: usize,
        trace: Vec<DateTrace>,
    }
    let decisions = dates - 1;
    let mut states: Vec<State> = modes
        .iter()
        .map(|&mode| State {
            mode,
            values: payout[dates - 1].clone(),
            coefficients: vec![Vec::new(); decisions],
            ranks: vec![0; decisions],
            flips: vec![0; decisions],
            fallback: 0,
            trace: Vec::new(),
        })
        .collect();

    for date in (0..decisions).rev() {
        let z = &payout[date];
        let design = design_at(paths, basis, z, date)?;
        let factor = Factorization::new(&design);
        if factor.rank() == 0 {
            return Err(Error::DegenerateRegression { date });
        }
        log::debug!("date {date}: rank {}/{} condition {:.3e}", factor.rank(), basis.len(), factor.condition_number());
        for state in states.iter_mut() {
            let fit = factor.fit(&state.values)?;
            let need_loo = state.mode == BackwardMode::Loolsm || options.track_flips || options.trace;
            let loo = need_loo.then(|| fit.loo_predictions());
            let decision: &[f64] = match (state.mode, &loo) {
                (BackwardMode::Loolsm, Some(loo)) => {
                    state.fallback += loo.fallback.len();
                    &loo.values
                }
                _ => &fit.fitted,
            };
            if let Some(loo) = &loo {
                state.flips[date] = (0..n)
                    .filter(|&k| {
                        decide_continue(z[k], fit.fitted[k], nonnegative)
                            != decide_continue(z[k], loo.values[k], nonnegative)
                    })
                    .count();
            }
            let next_value = options.trace.then(|| state.values.clone());
            for k in 0..n {
                if !decide_continue(z[k], decision[k], nonnegative) {
                    state.values[k] = z[k];
                }
            }
            state.ranks[date] = fit.rank;
            if let (Some(next_value), Some(loo)) = (next_value, &loo) {
                state.trace.push(DateTrace {
                    date,
                    rank: fit.rank,
                    payout: z.clone(),
                    next_value,
                    fitted: fit.fitted.clone(),
                    loo: loo.values.clone(),
                    leverage: fit.leverage.clone(),
                    fallback: loo.fallback.clone(),
                });
            }
            state.coefficients[date] = fit.beta;
        }
    }

    Ok(states
        .into_iter()
        .map(|state| {
            let mut result = PricingResult::from_values(state.values, state.mode.into(), paths);
            result.ranks = state.ranks;
            result.fallback_count = state.fallback;
            result.flip_counts =
                if options.track_flips || state.mode == BackwardMode::Loolsm { state.flips } else { Vec::new() };
            BackwardRun {
                result,
                policy: ExercisePolicy { coefficients: state.coefficients, basis: basis.clone() },
                trace: state.trace,
            }
        })
        .collect())
}

/// Values `paths` with a fixed exercise policy.
pub fn apply_policy(policy: &ExercisePolicy, paths: &PathSet, payoff: &PayoffSpec) -> Result<PricingResult> {
    check_inputs(paths, payoff, &policy.basis)?;
    let dates = paths.n_dates();
    if policy.coefficients.len() + 1 != dates {
        return Err(Error::ScheduleMismatch);
    }
    let payout = payout_matrix(paths, payoff);
    let mut values = payout[dates - 1].clone();
    for date in (0..dates - 1).rev() {
        let z = &payout[date];
        let design = design_at(paths, &policy.basis, z, date)?;
        let continuation = design.mul_vec(&policy.coefficients[date]);
        for (k, v) in values.iter_mut().enumerate() {
            if !decide_continue(z[k], continuation[k], payoff.nonnegative()) {
                *v = z[k];
            }
        }
    }
    Ok(PricingResult::from_values(values, Estimator::Lsm2, paths))
}

/// Two-pass LSM: the policy is estimated on `policy_paths` and applied to
/// `valuation_paths`.
pub fn price_two_pass(
    policy_paths: &PathSet,
    valuation_paths: &PathSet,
    payoff: &PayoffSpec,
    basis: &BasisSpec,
) -> Result<PricingResult> {
    if !policy_paths.same_schedule(valuation_paths) {
        return Err(Error::ScheduleMismatch);
    }
    let options = EngineOptions { track_flips: false, trace: false };
    let run = price_backward_with(policy_paths, payoff, basis, &[BackwardMode::Lsm], options)?.pop().expect("one run");
    let mut result = apply_policy(&run.policy, valuation_paths, payoff)?;
    result.ranks = run.result.ranks;
    Ok(result)
}

/// European price: average discounted payout at maturity.
pub fn european_mc_price(paths: &PathSet, payoff: &PayoffSpec) -> PricingResult {
    let last = paths.n_dates() - 1;
    let t = paths.times()[last];
    let values =
        (0..paths.n_paths()).map(|n| discounted_payout(payoff, paths.state(n, last), t, paths.rate())).collect();
    PricingResult::from_values(values, Estimator::European, paths)
}

/// Shifts `result` by the European Monte Carlo error `exact_euro - mc_euro.price`.
pub fn apply_control_variate(
    result: &PricingResult,
    exact_euro: f64,
    mc_euro: &PricingResult,
) -> Result<PricingResult> {
    if result.provenance != mc_euro.provenance {
        return Err(Error::ProvenanceMismatch);
    }
    let shift = exact_euro - mc_euro.price;
    let mut adjusted = result.clone();
    adjusted.price += shift;
    adjusted.per_path_value.iter_mut().for_each(|v| *v += shift);
    Ok(adjusted)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasStatistics {
    pub mean: f64,
    pub per_path: Vec<f64>,
    pub std_error: f64,
}

/// Look-ahead bias `LSM - LOOLSM` on a shared path set.
pub fn lookahead_bias(lsm: &PricingResult, loolsm: &PricingResult) -> Result<BiasStatistics> {
    if lsm.provenance != loolsm.provenance || lsm.per_path_value.len() != loolsm.per_path_value.len() {
        return Err(Error::ProvenanceMismatch);
    }
    let per_path: Vec<f64> = lsm.per_path_value.iter().zip(&loolsm.per_path_value).map(|(a, b)| a - b).collect();
    Ok(BiasStatistics {
        mean: lsm.price - loolsm.price,
        std_error: stats::standard_error(&per_path, lsm.provenance.antithetic),
        per_path,
    })
}
