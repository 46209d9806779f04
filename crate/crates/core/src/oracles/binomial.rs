use alloc::vec;
use alloc::vec::Vec;

use crate::market::{ExerciseSchedule, GbmModel};
use crate::{Error, Result};

/// Bermudan put on a Cox-Ross-Rubinstein lattice.
///
/// `steps` must be a multiple of the number of exercise dates and the dates
/// must be equally spaced, so that every date falls on a tree level. Early
/// exercise is only allowed on those levels.
pub fn binomial_bermudan_put(model: &GbmModel, schedule: &ExerciseSchedule, strike: f64, steps: usize) -> Result<f64> {
    if model.dim() != 1 {
        return Err(Error::InvalidModel("the binomial tree prices single-asset options".into()));
    }
    let dates = schedule.len();
    if steps < 100 || steps % dates != 0 {
        return Err(Error::InvalidSteps { steps, dates });
    }
    let maturity = schedule.maturity();
    let spacing = maturity / dates as f64;
    if schedule.times().iter().enumerate().any(|(i, &t)| (t - spacing * (i + 1) as f64).abs() > 1e-12 * maturity) {
        return Err(Error::InvalidSchedule("binomial pricing needs equally spaced exercise dates".into()));
    }
    let per_date = steps / dates;
    let spot = model.spot()[0];
    let sigma = model.vol()[0];
    let rate = model.rate();
    let dt = maturity / steps as f64;
    let log_up = sigma * libm::sqrt(dt);
    let up = libm::exp(log_up);
    let down = 1.0 / up;
    let growth = libm::exp((rate - model.dividend()[0]) * dt);
    let p = (growth - down) / (up - down);
    let discount = libm::exp(-rate * dt);
    let (pu, pd) = (discount * p, discount * (1.0 - p));

    let price_at = |level: usize, node: usize| spot * libm::exp(log_up * (2.0 * node as f64 - level as f64));
    let mut values: Vec<f64> = (0..=steps).map(|j| (strike - price_at(steps, j)).max(0.0)).collect();
    let mut next = vec![0.0; steps + 1];
    for level in (0..steps).rev() {
        for ((out, &lo), &hi) in next[..=level].iter_mut().zip(&values[..=level]).zip(&values[1..=level + 1]) {
            *out = pu * hi + pd * lo;
        }
        core::mem::swap(&mut values, &mut next);
        if level > 0 && level % per_date == 0 {
            for (j, v) in values[..=level].iter_mut().enumerate() {
                let exercise = strike - price_at(level, j);
                if exercise > *v {
                    *v = exercise;
                }
            }
        }
    }
    Ok(values[0])
}
