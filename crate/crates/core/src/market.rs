//! Correlated multi-asset geometric Brownian motion on an exercise schedule.
//!
//! Random numbers come from ChaCha8 with one stream per path (or per
//! antithetic pair): the generator is seeded with the set seed and positioned
//! with `set_stream(index)`, so any path can be regenerated on its own and the
//! result never depends on generation order or thread count. Uniforms are
//! mapped to normals with the inverse CDF.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::normal;
use crate::{Error, Result};

/// Risk-neutral GBM dynamics `dS_j / S_j = (r - q_j) dt + sigma_j dW_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct GbmModel {
    spot: Vec<f64>,
    rate: f64,
    dividend: Vec<f64>,
    vol: Vec<f64>,
    /// Row-major `J x J`.
    correlation: Vec<f64>,
}

impl GbmModel {
    pub fn new(spot: Vec<f64>, rate: f64, dividend: Vec<f64>, vol: Vec<f64>, correlation: Vec<f64>) -> Result<Self> {
        let dim = spot.len();
        if dim == 0 {
            return Err(Error::InvalidModel("no assets".into()));
        }
        if dividend.len() != dim || vol.len() != dim || correlation.len() != dim * dim {
            return Err(Error::InvalidModel(format!(
                "inconsistent dimensions: {dim} spots, {} dividends, {} vols, {} correlation entries",
                dividend.len(),
                vol.len(),
                correlation.len()
            )));
        }
        if let Some(j) = spot.iter().position(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidModel(format!("spot {j} must be positive, got {}", spot[j])));
        }
        if let Some(j) = vol.iter().position(|&v| !(v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidModel(format!("volatility {j} must be non-negative, got {}", vol[j])));
        }
        if !rate.is_finite() || dividend.iter().any(|q| !q.is_finite()) {
            return Err(Error::InvalidModel("rate and dividends must be finite".into()));
        }
        for a in 0..dim {
            if correlation[a * dim + a] != 1.0 {
                return Err(Error::InvalidModel(format!("correlation diagonal {a} is not 1")));
            }
            for b in 0..a {
                let (x, y) = (correlation[a * dim + b], correlation[b * dim + a]);
                if x != y || !(-1.0..=1.0).contains(&x) {
                    return Err(Error::InvalidModel(format!("correlation ({a},{b}) is not symmetric in [-1,1]")));
                }
            }
        }
        Ok(Self { spot, rate, dividend, vol, correlation })
    }

    pub fn single_asset(spot: f64, rate: f64, dividend: f64, vol: f64) -> Result<Self> {
        Self::new(vec![spot], rate, vec![dividend], vec![vol], vec![1.0])
    }

    /// `dim` identical assets with a common pairwise correlation.
    pub fn symmetric(dim: usize, spot: f64, rate: f64, dividend: f64, vol: f64, rho: f64) -> Result<Self> {
        let mut correlation = vec![rho; dim * dim];
        for j in 0..dim {
            correlation[j * dim + j] = 1.0;
        }
        Self::new(vec![spot; dim], rate, vec![dividend; dim], vec![vol; dim], correlation)
    }

    pub fn dim(&self) -> usize {
        self.spot.len()
    }

    pub fn spot(&self) -> &[f64] {
        &self.spot
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn dividend(&self) -> &[f64] {
        &self.dividend
    }

    pub fn vol(&self) -> &[f64] {
        &self.vol
    }

    pub fn correlation(&self) -> &[f64] {
        &self.correlation
    }

    /// Copy of the model with every spot replaced.
    pub fn with_spot(&self, spot: f64) -> Self {
        Self { spot: vec![spot; self.dim()], ..self.clone() }
    }
}

/// Exercise dates `t_1 < ... < t_I = T`; the valuation date 0 is not one of them.
#[derive(Debug, Clone, PartialEq)]
pub struct ExerciseSchedule {
    times: Vec<f64>,
}

impl ExerciseSchedule {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidSchedule("no exercise dates".into()));
        }
        if !(times[0] > 0.0) {
            return Err(Error::InvalidSchedule("the first exercise date must be after time 0".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidSchedule("dates must be finite and strictly increasing".into()));
        }
        Ok(Self { times })
    }

    /// `count` equally spaced dates ending at `maturity`.
    pub fn uniform(count: usize, maturity: f64) -> Result<Self> {
        Self::new((1..=count).map(|i| maturity * i as f64 / count as f64).collect())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn maturity(&self) -> f64 {
        self.times[self.times.len() - 1]
    }
}

/// `N` simulated trajectories sampled on the exercise dates.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    n_paths: usize,
    n_assets: usize,
    times: Vec<f64>,
    /// Continuously compounded rate used to discount payouts.
    rate: f64,
    /// `values[(n * I + i) * J + j]`
    values: Vec<f64>,
    seed: u64,
    antithetic: bool,
    pool_offset: usize,
}

impl PathSet {
    /// Wraps raw values, e.g. read back from a dump file.
    pub fn from_raw(
        schedule: &ExerciseSchedule,
        rate: f64,
        n_assets: usize,
        values: Vec<f64>,
        seed: u64,
        antithetic: bool,
    ) -> Result<Self> {
        let per_path = schedule.len() * n_assets;
        if n_assets == 0 || values.is_empty() || values.len() % per_path != 0 {
            return Err(Error::Shape(format!(
                "{} values do not form paths of {} dates x {n_assets} assets",
                values.len(),
                schedule.len()
            )));
        }
        let n_paths = values.len() / per_path;
        if antithetic && n_paths % 2 != 0 {
            return Err(Error::Shape(format!("antithetic set with odd path count {n_paths}")));
        }
        if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::Shape("path values must be positive and finite".into()));
        }
        Ok(Self { n_paths, n_assets, times: schedule.times.clone(), rate, values, seed, antithetic, pool_offset: 0 })
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn n_dates(&self) -> usize {
        self.times.len()
    }

    pub fn n_assets(&self) -> usize {
        self.n_assets
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Whether both sets sample the same dates, assets and discounting.
    pub fn same_schedule(&self, other: &PathSet) -> bool {
        self.times == other.times && self.n_assets == other.n_assets && self.rate == other.rate
    }

    pub fn antithetic(&self) -> bool {
        self.antithetic
    }

    pub fn pool_offset(&self) -> usize {
        self.pool_offset
    }

    /// Asset prices of path `n` on exercise date index `i` (0-based).
    pub fn state(&self, n: usize, i: usize) -> &[f64] {
        let start = (n * self.times.len() + i) * self.n_assets;
        &self.values[start..start + self.n_assets]
    }

    /// Row-major `N x I x J` values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Lower-triangular factor `L` with `L L^T = rho`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationFactor {
    dim: usize,
    lower: Vec<f64>,
}

impl CorrelationFactor {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.lower[row * self.dim + col]
    }

    /// `out = L z`.
    pub fn apply(&self, z: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            *o = self.lower[r * self.dim..r * self.dim + r + 1].iter().zip(z).map(|(l, x)| l * x).sum();
        }
    }
}

const PIVOT_FLOOR: f64 = 1e-12;
const PSD_TOLERANCE: f64 = 1e-10;

/// Cholesky factor of a correlation matrix (row-major `dim x dim`).
///
/// Pivots below `1e-12` are treated as exact linear dependence and their
/// column is zeroed, which keeps semidefinite matrices factorable.
pub fn correlation_factor(correlation: &[f64], dim: usize) -> Result<CorrelationFactor> {
    if correlation.len() != dim * dim || dim == 0 {
        return Err(Error::Shape(format!("{} entries for a {dim}x{dim} correlation", correlation.len())));
    }
    let mut lower = vec![0.0; dim * dim];
    for j in 0..dim {
        let mut pivot = correlation[j * dim + j];
        for k in 0..j {
            pivot -= lower[j * dim + k] * lower[j * dim + k];
        }
        if pivot < -PSD_TOLERANCE {
            return Err(Error::NotPositiveSemidefinite { index: j, pivot });
        }
        if pivot < PIVOT_FLOOR {
            continue;
        }
        let diag = libm::sqrt(pivot);
        lower[j * dim + j] = diag;
        for i in j + 1..dim {
            let mut s = correlation[i * dim + j];
            for k in 0..j {
                s -= lower[i * dim + k] * lower[j * dim + k];
            }
            lower[i * dim + j] = s / diag;
        }
    }
    for i in 0..dim {
        for j in 0..=i {
            let product: f64 = (0..=j).map(|k| lower[i * dim + k] * lower[j * dim + k]).sum();
            let target = correlation[i * dim + j];
            if (product - target).abs() > 1e-8 {
                return Err(Error::NotPositiveSemidefinite { index: i, pivot: product - target });
            }
        }
    }
    Ok(CorrelationFactor { dim, lower })
}

/// Path simulator for one model and schedule.
///
/// Uses the exact log-normal transition, accumulating the Brownian level so
/// that `S_j(t_i) = S_j(0) exp((r - q_j - sigma_j^2 / 2) t_i + sigma_j W_j(t_i))`.
#[derive(Debug, Clone)]
pub struct PathGenerator {
    model: GbmModel,
    schedule: ExerciseSchedule,
    factor: CorrelationFactor,
}

impl PathGenerator {
    pub fn new(model: &GbmModel, schedule: &ExerciseSchedule) -> Result<Self> {
        let factor = correlation_factor(model.correlation(), model.dim())?;
        Ok(Self { model: model.clone(), schedule: schedule.clone(), factor })
    }

    pub fn model(&self) -> &GbmModel {
        &self.model
    }

    pub fn schedule(&self) -> &ExerciseSchedule {
        &self.schedule
    }

    /// Values per path (`I * J`).
    pub fn path_len(&self) -> usize {
        self.schedule.len() * self.model.dim()
    }

    /// Fills paths `first .. first + out.len() / path_len()` of the set
    /// identified by `seed`. With `antithetic`, `first` and the count must be
    /// even.
    pub fn fill(&self, seed: u64, antithetic: bool, first: usize, out: &mut [f64]) {
        let len = self.path_len();
        debug_assert_eq!(out.len() % len, 0);
        if antithetic {
            debug_assert!(first % 2 == 0 && (out.len() / len) % 2 == 0);
            for (k, pair) in out.chunks_exact_mut(2 * len).enumerate() {
                let (a, b) = pair.split_at_mut(len);
                self.fill_one(seed, (first / 2 + k) as u64, a, Some(b));
            }
        } else {
            for (k, path) in out.chunks_exact_mut(len).enumerate() {
                self.fill_one(seed, (first + k) as u64, path, None);
            }
        }
    }

    fn fill_one(&self, seed: u64, stream: u64, out: &mut [f64], mut mirror: Option<&mut [f64]>) {
        let dim = self.model.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let mut z = vec![0.0; dim];
        let mut w = vec![0.0; dim];
        let mut level = vec![0.0; dim];
        let mut prev = 0.0;
        for (i, &t) in self.schedule.times().iter().enumerate() {
            let sqrt_dt = libm::sqrt(t - prev);
            prev = t;
            for zj in z.iter_mut() {
                *zj = normal::inverse_cdf(open_uniform(rng.next_u64()));
            }
            self.factor.apply(&z, &mut w);
            for j in 0..dim {
                level[j] += sqrt_dt * w[j];
                let sigma = self.model.vol[j];
                let drift = (self.model.rate - self.model.dividend[j] - 0.5 * sigma * sigma) * t;
                let spot = self.model.spot[j];
                out[i * dim + j] = spot * libm::exp(drift + sigma * level[j]);
                if let Some(m) = mirror.as_deref_mut() {
                    m[i * dim + j] = spot * libm::exp(drift - sigma * level[j]);
                }
            }
        }
    }

    /// Wraps values produced by [`fill`](Self::fill) into a path set.
    pub fn assemble(&self, values: Vec<f64>, seed: u64, antithetic: bool) -> PathSet {
        let n_paths = values.len() / self.path_len();
        PathSet {
            n_paths,
            n_assets: self.model.dim(),
            times: self.schedule.times().to_vec(),
            rate: self.model.rate,
            values,
            seed,
            antithetic,
            pool_offset: 0,
        }
    }

    pub fn generate(&self, n_paths: usize, seed: u64, antithetic: bool) -> Result<PathSet> {
        if n_paths == 0 || (antithetic && n_paths % 2 != 0) {
            return Err(Error::Shape(format!("cannot generate {n_paths} paths (antithetic: {antithetic})")));
        }
        let mut values = vec![0.0; n_paths * self.path_len()];
        self.fill(seed, antithetic, 0, &mut values);
        Ok(self.assemble(values, seed, antithetic))
    }
}

/// Uniform on the open interval (0, 1) from the top 53 bits.
fn open_uniform(bits: u64) -> f64 {
    ((bits >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Simulates `n_paths` trajectories; deterministic in `(seed, n_paths, antithetic)`.
pub fn generate_paths(
    model: &GbmModel,
    schedule: &ExerciseSchedule,
    n_paths: usize,
    seed: u64,
    antithetic: bool,
) -> Result<PathSet> {
    PathGenerator::new(model, schedule)?.generate(n_paths, seed, antithetic)
}

/// Splits a pool into `n_sets` contiguous, equally sized blocks.
pub fn split_pool(pool: &PathSet, n_sets: usize) -> Result<Vec<PathSet>> {
    (0..n_sets).map(|k| pool_block(pool, n_sets, k)).collect()
}

/// Block `index` of [`split_pool`]`(pool, n_sets)`, copying only that block.
pub fn pool_block(pool: &PathSet, n_sets: usize, index: usize) -> Result<PathSet> {
    let total = pool.n_paths;
    if n_sets == 0 || total % n_sets != 0 {
        return Err(Error::InvalidSplit { pool: total, sets: n_sets, reason: "set count must divide the pool size" });
    }
    let size = total / n_sets;
    if pool.antithetic && size % 2 != 0 {
        return Err(Error::InvalidSplit { pool: total, sets: n_sets, reason: "antithetic pairs would straddle sets" });
    }
    if index >= n_sets {
        return Err(Error::InvalidSplit { pool: total, sets: n_sets, reason: "block index out of range" });
    }
    let per_path = pool.times.len() * pool.n_assets;
    Ok(PathSet {
        n_paths: size,
        n_assets: pool.n_assets,
        times: pool.times.clone(),
        rate: pool.rate,
        values: pool.values[index * size * per_path..(index + 1) * size * per_path].to_vec(),
        seed: pool.seed,
        antithetic: pool.antithetic,
        pool_offset: pool.pool_offset + index * size,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn put_model() -> GbmModel {
        GbmModel::single_asset(100.0, 0.05, 0.02, 0.2).unwrap()
    }

    #[test]
    fn identity_correlation_factor() {
        let f = correlation_factor(&[1.0, 0.0, 0.0, 1.0], 2).unwrap();
        assert_eq!(f.lower, [1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn two_by_two_factor() {
        let f = correlation_factor(&[1.0, 0.5, 0.5, 1.0], 2).unwrap();
        assert_eq!(f.get(1, 0), 0.5);
        assert!((f.get(1, 1) - libm::sqrt(3.0) / 2.0).abs() < 1e-15);
        assert_eq!(f.get(0, 1), 0.0);
    }

    #[test]
    fn basket_correlation_reproduced() {
        let model = GbmModel::symmetric(4, 100.0, 0.0, 0.0, 0.4, 0.5).unwrap();
        let f = correlation_factor(model.correlation(), 4).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let v: f64 = (0..4).map(|k| f.get(i, k) * f.get(j, k)).sum();
                assert!((v - model.correlation()[i * 4 + j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn singular_and_indefinite_correlations() {
        let f = correlation_factor(&[1.0, 1.0, 1.0, 1.0], 2).unwrap();
        assert_eq!(f.get(1, 1), 0.0);
        assert_eq!(f.get(1, 0), 1.0);
        let bad = [1.0, 0.9, 0.9, 0.9, 1.0, -0.9, 0.9, -0.9, 1.0];
        assert!(matches!(correlation_factor(&bad, 3), Err(Error::NotPositiveSemidefinite { .. })));
    }

    #[test]
    fn zero_volatility_is_deterministic_drift() {
        let model = GbmModel::single_asset(100.0, 0.05, 0.02, 0.0).unwrap();
        let schedule = ExerciseSchedule::uniform(5, 1.0).unwrap();
        let paths = generate_paths(&model, &schedule, 6, 3, true).unwrap();
        for n in 0..6 {
            for (i, &t) in schedule.times().iter().enumerate() {
                assert_eq!(paths.state(n, i)[0], 100.0 * libm::exp(0.03 * t));
            }
        }
    }

    #[test]
    fn antithetic_pairs_mirror_around_the_median() {
        let model =
            GbmModel::new(vec![100.0, 90.0], 0.05, vec![0.1, 0.0], vec![0.2, 0.3], vec![1.0, 0.3, 0.3, 1.0]).unwrap();
        let schedule = ExerciseSchedule::uniform(9, 3.0).unwrap();
        let paths = generate_paths(&model, &schedule, 20, 11, true).unwrap();
        for k in 0..10 {
            for (i, &t) in schedule.times().iter().enumerate() {
                for j in 0..2 {
                    let sigma = model.vol()[j];
                    let median = model.spot()[j] * libm::exp((0.05 - model.dividend()[j] - 0.5 * sigma * sigma) * t);
                    let a = libm::log(paths.state(2 * k, i)[j] / median);
                    let b = libm::log(paths.state(2 * k + 1, i)[j] / median);
                    assert!((a + b).abs() < 1e-12, "pair {k} date {i} asset {j}");
                }
            }
        }
    }

    #[test]
    fn generation_is_order_independent() {
        let generator = PathGenerator::new(&put_model(), &ExerciseSchedule::uniform(5, 1.0).unwrap()).unwrap();
        let whole = generator.generate(40, 99, true).unwrap();
        let mut pieces = vec![0.0; 40 * 5];
        generator.fill(99, true, 20, &mut pieces[100..]);
        generator.fill(99, true, 0, &mut pieces[..100]);
        assert_eq!(whole.values(), &pieces[..]);
        let plain = generator.generate(40, 99, false).unwrap();
        let mut tail = vec![0.0; 5 * 7];
        generator.fill(99, false, 33, &mut tail);
        assert_eq!(&plain.values()[33 * 5..], &tail[..]);
    }

    #[test]
    fn split_into_contiguous_blocks() {
        let schedule = ExerciseSchedule::uniform(5, 1.0).unwrap();
        let pool = generate_paths(&put_model(), &schedule, 1200, 5, true).unwrap();
        let sets = split_pool(&pool, 10).unwrap();
        assert_eq!(sets.len(), 10);
        for (k, set) in sets.iter().enumerate() {
            assert_eq!(set.n_paths(), 120);
            assert_eq!(set.pool_offset(), 120 * k);
            assert_eq!(set.state(0, 2), pool.state(120 * k, 2));
        }
        assert_eq!(split_pool(&pool, 1).unwrap()[0], pool);
        assert!(split_pool(&pool, 7).is_err());
        assert!(matches!(split_pool(&pool, 400), Err(Error::InvalidSplit { .. })));
    }

    #[test]
    fn paper_pool_sizes_divide_evenly() {
        for n_mc in [10, 20, 30, 40, 60, 120, 240, 720] {
            let n = 1_440_000 / n_mc;
            assert_eq!(n * n_mc, 1_440_000);
            assert_eq!(n % 2, 0);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(ExerciseSchedule::new(vec![0.0, 1.0]).is_err());
        assert!(ExerciseSchedule::new(vec![0.5, 0.5]).is_err());
        assert!(GbmModel::single_asset(-1.0, 0.0, 0.0, 0.2).is_err());
        assert!(GbmModel::new(vec![1.0, 1.0], 0.0, vec![0.0; 2], vec![0.2; 2], vec![1.0, 0.5, 0.4, 1.0]).is_err());
        let schedule = ExerciseSchedule::uniform(2, 1.0).unwrap();
        assert!(generate_paths(&put_model(), &schedule, 7, 1, true).is_err());
    }
}
