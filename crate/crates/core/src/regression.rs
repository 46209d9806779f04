//! Linear least squares with leverage scores and closed-form leave-one-out
//! predictions.
//!
//! The solver works on the column-equilibrated design `X D^-1`: a Householder
//! QR factorization `X D^-1 = Q R` followed by a one-sided Jacobi SVD of the
//! small factor `R = U S V^T`. The first `rank` columns of `Q U` form an
//! orthonormal basis `B` of the column space, so the leverage scores are the
//! squared row norms of `B` and the N x N hat matrix is never formed.
//! Singular values below `max(N, M) * eps * s_max` are treated as zero and the
//! coefficients are the truncated (minimum-norm) solution.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Leverage threshold: paths with `1 - h < LEVERAGE_EPS` keep `C' = C`.
pub const LEVERAGE_EPS: f64 = 1e-10;

/// An `N x M` regression design whose first column is the constant 1.
///
/// Stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DesignMatrix {
    /// Builds a design from row-major values.
    pub fn from_row_major(rows: usize, cols: usize, values: &[f64]) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::Shape(alloc::format!("{} values supplied for a {rows}x{cols} design", values.len())));
        }
        Self::from_fn(rows, cols, |n, row| row.copy_from_slice(&values[n * cols..(n + 1) * cols]))
    }

    /// Builds a design by filling one row at a time.
    pub fn from_fn(rows: usize, cols: usize, mut fill: impl FnMut(usize, &mut [f64])) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape(alloc::format!("empty design {rows}x{cols}")));
        }
        let mut data = vec![0.0; rows * cols];
        let mut row = vec![0.0; cols];
        for n in 0..rows {
            fill(n, &mut row);
            for (m, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: n, col: Some(m) });
                }
                data[m * rows + n] = v;
            }
            if row[0] != 1.0 {
                return Err(Error::MissingIntercept { row: n });
            }
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[col * self.rows + row]
    }

    pub fn column(&self, col: usize) -> &[f64] {
        &self.data[col * self.rows..(col + 1) * self.rows]
    }

    /// `X b` for a coefficient vector `b`.
    pub fn mul_vec(&self, coefficients: &[f64]) -> Vec<f64> {
        debug_assert_eq!(coefficients.len(), self.cols);
        let mut out = vec![0.0; self.rows];
        for (col, &b) in coefficients.iter().enumerate() {
            if b == 0.0 {
                continue;
            }
            for (o, &x) in out.iter_mut().zip(self.column(col)) {
                *o += x * b;
            }
        }
        out
    }
}

/// Result of one least-squares regression.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionFit {
    pub beta: Vec<f64>,
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
    pub leverage: Vec<f64>,
    pub rank: usize,
}

/// Leave-one-out adjusted values together with the paths that hit the
/// `1 - h < LEVERAGE_EPS` fallback.
#[derive(Debug, Clone, PartialEq)]
pub struct LooAdjusted {
    pub values: Vec<f64>,
    pub fallback: Vec<usize>,
}

impl RegressionFit {
    /// Leave-one-out predictions `C'_n = C_n - h_n e_n / (1 - h_n)`.
    pub fn loo_predictions(&self) -> LooAdjusted {
        let mut fallback = Vec::new();
        let values = self
            .fitted
            .iter()
            .zip(&self.residuals)
            .zip(&self.leverage)
            .enumerate()
            .map(|(n, ((&c, &e), &h))| {
                if 1.0 - h < LEVERAGE_EPS {
                    fallback.push(n);
                    c
                } else {
                    c - h * e / (1.0 - h)
                }
            })
            .collect();
        LooAdjusted { values, fallback }
    }

    /// Leave-one-out residuals `e'_n = e_n / (1 - h_n)`.
    pub fn loo_residuals(&self) -> LooAdjusted {
        let mut fallback = Vec::new();
        let values = self
            .residuals
            .iter()
            .zip(&self.leverage)
            .enumerate()
            .map(|(n, (&e, &h))| {
                if 1.0 - h < LEVERAGE_EPS {
                    fallback.push(n);
                    e
                } else {
                    e / (1.0 - h)
                }
            })
            .collect();
        LooAdjusted { values, fallback }
    }
}

/// Solve `min ||y - X b||` for one response.
pub fn fit_least_squares(x: &DesignMatrix, y: &[f64]) -> Result<RegressionFit> {
    Factorization::new(x).fit(y)
}

/// Orthogonal factorization of a design, reusable across responses.
///
/// The LSM and LOOLSM inductions regress different value vectors on the
/// same design, so the engine factors each date once.
#[derive(Debug, Clone)]
pub struct Factorization<'a> {
    design: &'a DesignMatrix,
    /// `N x rank` orthonormal basis of the column space, column-major.
    basis: Vec<f64>,
    /// `M x rank` map from basis coordinates to coefficients, column-major.
    coef_map: Vec<f64>,
    leverage: Vec<f64>,
    singular_values: Vec<f64>,
    rank: usize,
}

impl<'a> Factorization<'a> {
    pub fn new(design: &'a DesignMatrix) -> Self {
        let n = design.rows;
        let m = design.cols;
        let k = n.min(m);

        // column equilibration
        let scale: Vec<f64> = (0..m)
            .map(|c| {
                let norm = norm2(design.column(c));
                if norm > 0.0 {
                    norm
                } else {
                    1.0
                }
            })
            .collect();
        let mut a = design.data.clone();
        for (c, &s) in scale.iter().enumerate() {
            a[c * n..(c + 1) * n].iter_mut().for_each(|v| *v /= s);
        }

        // Householder QR; reflector k lives in a[k*n + k ..], with its factor in `betas`.
        let mut betas = vec![0.0; k];
        let mut rdiag = vec![0.0; k];
        for j in 0..k {
            let (head, tail) = a.split_at_mut((j + 1) * n);
            let v = &mut head[j * n + j..];
            let alpha_norm = norm2(v);
            if alpha_norm == 0.0 {
                continue;
            }
            let alpha = if v[0] > 0.0 { -alpha_norm } else { alpha_norm };
            v[0] -= alpha;
            let vtv = dot(v, v);
            rdiag[j] = alpha;
            if vtv == 0.0 {
                continue;
            }
            let beta = 2.0 / vtv;
            betas[j] = beta;
            for col in tail.chunks_exact_mut(n) {
                let target = &mut col[j..];
                let s = beta * dot(v, target);
                if s != 0.0 {
                    axpy(-s, v, target);
                }
            }
        }

        // R is k x m upper trapezoidal, stored column-major.
        let mut r = vec![0.0; k * m];
        for c in 0..m {
            for row in 0..k.min(c + 1) {
                r[c * k + row] = if row == c { rdiag[row] } else { a[c * n + row] };
            }
        }

        let (singular_values, left, right) = jacobi_svd(k, m, r);
        let s_max = singular_values.first().copied().unwrap_or(0.0);
        let tol = (n.max(m) as f64) * f64::EPSILON * s_max;
        let rank = singular_values.iter().take_while(|&&s| s > tol && s > 0.0).count();

        // basis = Q [U_r; 0]
        let mut basis = vec![0.0; n * rank];
        for j in 0..rank {
            let col = &mut basis[j * n..(j + 1) * n];
            col[..k].copy_from_slice(&left[j * k..(j + 1) * k]);
            for h in (0..k).rev() {
                if betas[h] == 0.0 {
                    continue;
                }
                let v = &a[h * n + h..(h + 1) * n];
                let target = &mut col[h..];
                let s = betas[h] * dot(v, target);
                if s != 0.0 {
                    axpy(-s, v, target);
                }
            }
        }

        // coefficients = D^-1 V_r S_r^-1 (B^T y)
        let mut coef_map = vec![0.0; m * rank];
        for j in 0..rank {
            for c in 0..m {
                coef_map[j * m + c] = right[j * m + c] / (singular_values[j] * scale[c]);
            }
        }

        let mut leverage = vec![0.0; n];
        for j in 0..rank {
            for (h, &b) in leverage.iter_mut().zip(&basis[j * n..(j + 1) * n]) {
                *h += b * b;
            }
        }
        leverage.iter_mut().for_each(|h| *h = h.clamp(0.0, 1.0));

        Self { design, basis, coef_map, leverage, singular_values, rank }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn leverage(&self) -> &[f64] {
        &self.leverage
    }

    /// Singular values of the column-equilibrated design, descending.
    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    /// Ratio of the largest to the smallest retained singular value.
    pub fn condition_number(&self) -> f64 {
        match (self.singular_values.first(), self.rank) {
            (Some(&s), r) if r > 0 => s / self.singular_values[r - 1],
            _ => f64::INFINITY,
        }
    }

    pub fn fit(&self, y: &[f64]) -> Result<RegressionFit> {
        let n = self.design.rows;
        let m = self.design.cols;
        if y.len() != n {
            return Err(Error::Shape(alloc::format!("response has {} rows, design has {n}", y.len())));
        }
        if let Some(row) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row, col: None });
        }
        let mut beta = vec![0.0; m];
        for j in 0..self.rank {
            let coord = dot(&self.basis[j * n..(j + 1) * n], y);
            axpy(coord, &self.coef_map[j * m..(j + 1) * m], &mut beta);
        }
        let fitted = self.design.mul_vec(&beta);
        let residuals = y.iter().zip(&fitted).map(|(&v, &c)| v - c).collect();
        Ok(RegressionFit { beta, fitted, residuals, leverage: self.leverage.clone(), rank: self.rank })
    }
}

/// One-sided Jacobi SVD of a `k x m` column-major matrix.
///
/// Returns `(singular values, U, V)` sorted by descending singular value:
/// `m` singular values, `U` as `m` unit columns of length `k` (zero for null
/// singular values) and `V` as `m` orthonormal columns of length `m`.
fn jacobi_svd(k: usize, m: usize, mut w: Vec<f64>) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut v = vec![0.0; m * m];
    for i in 0..m {
        v[i * m + i] = 1.0;
    }
    if k > 0 {
        for _sweep in 0..60 {
            let mut rotated = false;
            for p in 0..m {
                for q in p + 1..m {
                    let (wp, wq) = two_columns(&mut w, k, p, q);
                    let alpha = dot(wp, wp);
                    let beta = dot(wq, wq);
                    let gamma = dot(wp, wq);
                    if alpha == 0.0 || beta == 0.0 || gamma.abs() <= f64::EPSILON * libm::sqrt(alpha * beta) {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (2.0 * gamma);
                    let t = libm::copysign(1.0, zeta) / (zeta.abs() + libm::sqrt(1.0 + zeta * zeta));
                    let c = 1.0 / libm::sqrt(1.0 + t * t);
                    let s = c * t;
                    rotate(wp, wq, c, s);
                    let (vp, vq) = two_columns(&mut v, m, p, q);
                    rotate(vp, vq, c, s);
                }
            }
            if !rotated {
                break;
            }
        }
    }

    let norms: Vec<f64> = (0..m).map(|j| norm2(&w[j * k..(j + 1) * k])).collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));

    let mut sigma = Vec::with_capacity(m);
    let mut left = vec![0.0; m * k];
    let mut right = vec![0.0; m * m];
    for (dst, &src) in order.iter().enumerate() {
        let s = norms[src];
        sigma.push(s);
        if s > 0.0 {
            for (l, &x) in left[dst * k..(dst + 1) * k].iter_mut().zip(&w[src * k..(src + 1) * k]) {
                *l = x / s;
            }
        }
        right[dst * m..(dst + 1) * m].copy_from_slice(&v[src * m..(src + 1) * m]);
    }
    (sigma, left, right)
}

fn two_columns(data: &mut [f64], len: usize, p: usize, q: usize) -> (&mut [f64], &mut [f64]) {
    debug_assert!(p < q);
    let (lo, hi) = data.split_at_mut(q * len);
    (&mut lo[p * len..(p + 1) * len], &mut hi[..len])
}

fn rotate(a: &mut [f64], b: &mut [f64], c: f64, s: f64) {
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        let (xa, yb) = (*x, *y);
        *x = c * xa - s * yb;
        *y = s * xa + c * yb;
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn norm2(x: &[f64]) -> f64 {
    // scaled to avoid overflow on raw high-order monomials
    let big = x.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if big == 0.0 || !big.is_finite() {
        return big;
    }
    let ss: f64 = x.iter().map(|v| (v / big) * (v / big)).sum();
    big * libm::sqrt(ss)
}
