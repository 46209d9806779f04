use crate::market::GbmModel;
use crate::normal::cdf;
use crate::oracles::bivariate_normal_cdf;
use crate::{Error, Result};

fn d1_d2(spot: f64, vol: f64, rate: f64, dividend: f64, strike: f64, expiry: f64) -> (f64, f64) {
    let sd = vol * libm::sqrt(expiry);
    let d1 = (libm::log(spot / strike) + (rate - dividend) * expiry) / sd + 0.5 * sd;
    (d1, d1 - sd)
}

/// Black-Scholes put with continuous dividend yield.
pub fn bs_european_put(spot: f64, vol: f64, rate: f64, dividend: f64, strike: f64, expiry: f64) -> f64 {
    let forward_disc = spot * libm::exp(-dividend * expiry);
    let strike_disc = strike * libm::exp(-rate * expiry);
    if vol * libm::sqrt(expiry) <= 0.0 {
        return (strike_disc - forward_disc).max(0.0);
    }
    let (d1, d2) = d1_d2(spot, vol, rate, dividend, strike, expiry);
    strike_disc * cdf(-d2) - forward_disc * cdf(-d1)
}

/// Black-Scholes call with continuous dividend yield.
pub fn bs_european_call(spot: f64, vol: f64, rate: f64, dividend: f64, strike: f64, expiry: f64) -> f64 {
    let forward_disc = spot * libm::exp(-dividend * expiry);
    let strike_disc = strike * libm::exp(-rate * expiry);
    if vol * libm::sqrt(expiry) <= 0.0 {
        return (forward_disc - strike_disc).max(0.0);
    }
    let (d1, d2) = d1_d2(spot, vol, rate, dividend, strike, expiry);
    forward_disc * cdf(d1) - strike_disc * cdf(d2)
}

/// European call on the maximum of two assets (Stulz; Johnson).
pub fn bestof2_european_call(model: &GbmModel, strike: f64, expiry: f64) -> Result<f64> {
    if model.dim() != 2 {
        return Err(Error::InvalidModel("the best-of formula needs exactly two assets".into()));
    }
    let (s1, s2) = (model.spot()[0], model.spot()[1]);
    let (q1, q2) = (model.dividend()[0], model.dividend()[1]);
    let (v1, v2) = (model.vol()[0], model.vol()[1]);
    let rho = model.correlation()[1];
    let r = model.rate();
    let sqrt_t = libm::sqrt(expiry);

    let spread_vol = libm::sqrt((v1 * v1 + v2 * v2 - 2.0 * rho * v1 * v2).max(0.0));
    if v1 <= 0.0 || v2 <= 0.0 || spread_vol <= 0.0 {
        return Err(Error::InvalidModel("the best-of formula needs positive and non-degenerate volatilities".into()));
    }
    let d = (libm::log(s1 / s2) + (q2 - q1 + 0.5 * spread_vol * spread_vol) * expiry) / (spread_vol * sqrt_t);
    let y1 = (libm::log(s1 / strike) + (r - q1 + 0.5 * v1 * v1) * expiry) / (v1 * sqrt_t);
    let y2 = (libm::log(s2 / strike) + (r - q2 + 0.5 * v2 * v2) * expiry) / (v2 * sqrt_t);
    let rho1 = (v1 - rho * v2) / spread_vol;
    let rho2 = (v2 - rho * v1) / spread_vol;

    let first = s1 * libm::exp(-q1 * expiry) * bivariate_normal_cdf(y1, d, rho1);
    let second = s2 * libm::exp(-q2 * expiry) * bivariate_normal_cdf(y2, -d + spread_vol * sqrt_t, rho2);
    let both_below = bivariate_normal_cdf(-y1 + v1 * sqrt_t, -y2 + v2 * sqrt_t, rho);
    Ok(first + second - strike * libm::exp(-r * expiry) * (1.0 - both_below))
}
