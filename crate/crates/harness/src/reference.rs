//! Exact prices the experiments measure offsets against.

use loolsm_core::contracts::PayoffKind;
use loolsm_core::oracles::{bestof2_european_call, binomial_bermudan_put, bs_european_put, reference_price};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};

/// Lattice size for put references off the published grid.
const TREE_STEPS: usize = 50_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactPrices {
    pub bermudan: f64,
    pub european: f64,
}

/// Published prices when the parameters are the published ones; otherwise the
/// put case falls back to the lattice and Black-Scholes. Other cases are rejected.
pub fn exact_prices(config: &ExperimentConfig, key: f64) -> Result<ExactPrices> {
    let missing = |e: loolsm_core::Error| HarnessError::Config(format!("no reference price: {e}"));
    let model = config.model(key)?;
    let payoff = config.payoff(key)?;
    let expiry = config.maturity;
    if config.has_published_parameters() {
        if let Ok(published) = reference_price(config.case, key) {
            let european = match config.case {
                PayoffKind::PutSingle => {
                    bs_european_put(model.spot()[0], config.vol, config.rate, config.dividend, payoff.strike(), expiry)
                }
                PayoffKind::BestOfCall => bestof2_european_call(&model, payoff.strike(), expiry)
                    .map_err(|e| HarnessError::core("best-of European price", e))?,
                PayoffKind::BasketCall => published.european,
            };
            return Ok(ExactPrices { bermudan: published.bermudan, european });
        }
    }
    match config.case {
        PayoffKind::PutSingle => {
            let schedule = config.schedule()?;
            let steps = TREE_STEPS.div_ceil(config.dates) * config.dates;
            let bermudan = binomial_bermudan_put(&model, &schedule, payoff.strike(), steps).map_err(missing)?;
            let european =
                bs_european_put(model.spot()[0], config.vol, config.rate, config.dividend, payoff.strike(), expiry);
            Ok(ExactPrices { bermudan, european })
        }
        _ => {
            Err(missing(reference_price(config.case, key).err().unwrap_or_else(|| {
                loolsm_core::Error::InvalidModel("parameters differ from the published ones".into())
            })))
        }
    }
}
