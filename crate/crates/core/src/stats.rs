//! Sample statistics shared by the engine and the experiment driver.

use alloc::vec::Vec;

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation with the `n / (n - 1)` correction; NaN for fewer
/// than two values.
pub fn sample_std(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return f64::NAN;
    }
    let mu = mean(values);
    let ss: f64 = values.iter().map(|v| (v - mu) * (v - mu)).sum();
    libm::sqrt(ss / (n - 1) as f64)
}

/// Standard error of the mean of `values`.
///
/// With `antithetic` set, consecutive pairs are averaged first and the error
/// is computed over the pair means.
pub fn standard_error(values: &[f64], antithetic: bool) -> f64 {
    if antithetic && values.len() % 2 == 0 {
        let pairs: Vec<f64> = values.chunks_exact(2).map(|p| 0.5 * (p[0] + p[1])).collect();
        sample_std(&pairs) / libm::sqrt(pairs.len() as f64)
    } else {
        sample_std(values) / libm::sqrt(values.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(mean(&v), 2.5);
        assert!((sample_std(&v) - libm::sqrt(5.0 / 3.0)).abs() < 1e-15);
        assert!(sample_std(&[1.0]).is_nan());
    }

    #[test]
    fn pair_means_for_antithetic_error() {
        // pairs average to 1.5 and 3.5
        let v = [1.0, 2.0, 3.0, 4.0];
        let se = standard_error(&v, true);
        assert!((se - libm::sqrt(2.0) / libm::sqrt(2.0)).abs() < 1e-15);
    }
}
