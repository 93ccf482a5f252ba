//! Ordinary least squares by Householder QR.

use serde::{Deserialize, Serialize};

use super::StatsError;
use crate::scalar::Real;

/// Dense row-major design matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> DesignMatrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self, StatsError> {
        if data.len() != rows * cols {
            return Err(StatsError::LengthMismatch { left: data.len(), right: rows * cols });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from equal-length columns.
    pub fn from_columns(columns: &[Vec<T>]) -> Result<Self, StatsError> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        if let Some(bad) = columns.iter().find(|c| c.len() != rows) {
            return Err(StatsError::LengthMismatch { left: bad.len(), right: rows });
        }
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            data.extend(columns.iter().map(|c| c[r]));
        }
        Ok(Self { rows, cols, data })
    }

    /// Intercept column followed by the given regressors.
    pub fn with_intercept(regressors: &[Vec<T>]) -> Result<Self, StatsError> {
        let n = regressors.first().map_or(0, Vec::len);
        let mut cols = Vec::with_capacity(regressors.len() + 1);
        cols.push(vec![T::one(); n]);
        cols.extend(regressors.iter().cloned());
        Self::from_columns(&cols)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.cols + c]
    }

    pub fn column(&self, c: usize) -> Vec<T> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsFit<T> {
    pub coefficients: Vec<T>,
    pub std_errors: Vec<T>,
    pub residuals: Vec<T>,
    pub rss: T,
    pub n: usize,
    /// Regressor count, intercept included.
    pub k: usize,
}

pub fn ols_fit<T: Real>(y: &[T], x: &DesignMatrix<T>) -> Result<OlsFit<T>, StatsError> {
    let (n, k) = (x.rows, x.cols);
    if y.len() != n {
        return Err(StatsError::LengthMismatch { left: y.len(), right: n });
    }
    if k == 0 || n <= k {
        return Err(StatsError::TooShort { needed: k + 1, got: n });
    }
    if y.iter().chain(x.data.iter()).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }

    // column-major working copy
    let mut a: Vec<Vec<T>> = (0..k).map(|c| x.column(c)).collect();
    let mut qty = y.to_vec();
    let max_norm = a.iter().map(|c| norm(c)).fold(T::zero(), T::max);
    let tol = max_norm * T::epsilon() * T::from_count(n.max(k)) * T::lit(16.0);

    for j in 0..k {
        let alpha = norm(&a[j][j..]);
        if alpha <= tol {
            return Err(StatsError::RankDeficient { column: j });
        }
        let alpha = if a[j][j] > T::zero() { -alpha } else { alpha };
        let mut v: Vec<T> = a[j][j..].to_vec();
        v[0] = v[0] - alpha;
        let vnorm2: T = v.iter().map(|&e| e * e).sum();
        if vnorm2 > T::zero() {
            for col in a.iter_mut().skip(j) {
                reflect(&v, vnorm2, &mut col[j..]);
            }
            reflect(&v, vnorm2, &mut qty[j..]);
        }
    }

    // back substitution on R b = Q'y
    let mut coefficients = vec![T::zero(); k];
    for i in (0..k).rev() {
        let s: T = (i + 1..k).map(|c| a[c][i] * coefficients[c]).sum();
        coefficients[i] = (qty[i] - s) / a[i][i];
    }

    let residuals: Vec<T> = (0..n)
        .map(|r| y[r] - (0..k).map(|c| x.get(r, c) * coefficients[c]).sum::<T>())
        .collect();
    let rss: T = residuals.iter().map(|&e| e * e).sum();

    // (X'X)^{-1} = R^{-1} R^{-T}; only the diagonal is needed
    let mut rinv = vec![vec![T::zero(); k]; k];
    for j in 0..k {
        rinv[j][j] = T::one() / a[j][j];
        for i in (0..j).rev() {
            let s: T = (i + 1..=j).map(|m| a[m][i] * rinv[m][j]).sum();
            rinv[i][j] = -s / a[i][i];
        }
    }
    let sigma2 = rss / T::from_count(n - k);
    let std_errors = (0..k)
        .map(|i| (sigma2 * rinv[i].iter().map(|&e| e * e).sum::<T>()).sqrt())
        .collect();

    Ok(OlsFit { coefficients, std_errors, residuals, rss, n, k })
}

fn norm<T: Real>(v: &[T]) -> T {
    let scale = v.iter().fold(T::zero(), |m, e| m.max(e.abs()));
    if scale == T::zero() {
        return T::zero();
    }
    scale * v.iter().map(|&e| (e / scale) * (e / scale)).sum::<T>().sqrt()
}

/// Applies `I - 2 v v' / (v'v)` to `target` in place.
fn reflect<T: Real>(v: &[T], vnorm2: T, target: &mut [T]) {
    let dot: T = v.iter().zip(target.iter()).map(|(&a, &b)| a * b).sum();
    let f = T::lit(2.0) * dot / vnorm2;
    for (t, &vi) in target.iter_mut().zip(v) {
        *t = *t - f * vi;
    }
}
