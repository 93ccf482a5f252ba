//! Augmented Dickey-Fuller unit-root test, constant and no trend.
//!
//! Fits `dy_t = a + b * y_{t-1} + sum_i g_i * dy_{t-i} + e` and compares the
//! t-ratio of `b` with large-sample Dickey-Fuller critical values.

use serde::{Deserialize, Serialize};

use super::ols::{ols_fit, DesignMatrix};
use super::{StatsError, MIN_COVERAGE};
use crate::scalar::Real;
use crate::series::WeeklySeries;

/// Critical values for the constant, no-trend case at 1%, 5% and 10%.
pub const CRITICAL_VALUES: [(f64, f64); 3] = [(0.01, -3.43), (0.05, -2.86), (0.10, -2.57)];

pub const DEFAULT_LAG_ORDER: usize = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdfResult<T> {
    pub statistic: T,
    pub lag_order: usize,
    /// Observations in the test regression.
    pub n_obs: usize,
    pub reject_1pct: bool,
    pub reject_5pct: bool,
    pub reject_10pct: bool,
    /// Share of the series inside the contiguous run that was tested.
    pub coverage: f64,
    /// Set when less than 80% of the series could be used.
    pub short_run_warning: bool,
}

impl<T: Real> AdfResult<T> {
    /// Unit root rejected at `level` (one of 0.01, 0.05, 0.10).
    pub fn rejects_at(&self, level: f64) -> Option<bool> {
        CRITICAL_VALUES
            .iter()
            .position(|&(l, _)| (l - level).abs() < 1e-12)
            .map(|i| [self.reject_1pct, self.reject_5pct, self.reject_10pct][i])
    }
}

pub fn adf_test<T: Real>(s: &WeeklySeries<T>, lag_order: usize) -> Result<AdfResult<T>, StatsError> {
    let (offset, len) = s.longest_observed_run();
    let y: Vec<T> = s.values[offset..offset + len].iter().map(|v| v.expect("observed run")).collect();
    let needed = lag_order + 10;
    if y.len() < needed {
        return Err(StatsError::TooShort { needed, got: y.len() });
    }
    let lo = y.iter().copied().fold(T::infinity(), T::min);
    let hi = y.iter().copied().fold(T::neg_infinity(), T::max);
    if lo == hi {
        return Err(StatsError::Degenerate("degenerate series".into()));
    }

    let dy: Vec<T> = y.windows(2).map(|w| w[1] - w[0]).collect();
    // dy[t - 1] is the change into y[t]
    let rows: Vec<usize> = (lag_order + 1..y.len()).collect();
    let target: Vec<T> = rows.iter().map(|&t| dy[t - 1]).collect();
    let mut regressors = vec![rows.iter().map(|&t| y[t - 1]).collect::<Vec<T>>()];
    for i in 1..=lag_order {
        regressors.push(rows.iter().map(|&t| dy[t - 1 - i]).collect());
    }
    let fit = ols_fit(&target, &DesignMatrix::with_intercept(&regressors)?)?;
    let se = fit.std_errors[1];
    if se.is_nan() || se <= T::zero() {
        return Err(StatsError::Degenerate("degenerate series".into()));
    }
    let statistic = fit.coefficients[1] / se;
    let reject = |cv: f64| statistic < T::lit(cv);
    let coverage = len as f64 / s.len() as f64;
    Ok(AdfResult {
        statistic,
        lag_order,
        n_obs: rows.len(),
        reject_1pct: reject(CRITICAL_VALUES[0].1),
        reject_5pct: reject(CRITICAL_VALUES[1].1),
        reject_10pct: reject(CRITICAL_VALUES[2].1),
        coverage,
        short_run_warning: coverage < MIN_COVERAGE,
    })
}
