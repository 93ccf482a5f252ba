//! Granger causality by nested-regression F test.
//!
//! The restricted model regresses `y_t` on an intercept and `k` own lags; the
//! unrestricted model adds `k` lags of `x`. Both use the same observations.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::dist::f_sf;
use super::ols::{ols_fit, DesignMatrix};
use super::transform::{difference, fraction_series};
use super::{StatsError, MIN_COVERAGE};
use crate::scalar::Real;
use crate::series::{ensure_aligned, WeeklySeries};

/// Smallest admissible residual degrees of freedom of the unrestricted model.
pub const MIN_RESIDUAL_DF: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrangerResult<T> {
    pub lags: usize,
    pub f_stat: T,
    pub p_value: T,
    /// Observations in both regressions.
    pub n_obs: usize,
    pub df_num: usize,
    pub df_den: usize,
    pub rss_restricted: T,
    pub rss_unrestricted: T,
    /// The unrestricted model fit perfectly; `p_value` is reported as 0.
    pub degenerate_fit: bool,
    pub coverage: f64,
    pub short_run_warning: bool,
}

/// `v[t - lag]` for `t` in `k..len`.
fn lagged<V: Copy>(v: &[V], k: usize, lag: usize) -> Vec<V> {
    (k..v.len()).map(|t| v[t - lag]).collect()
}

pub fn granger_test<T: Real>(
    x: &WeeklySeries<T>,
    y: &WeeklySeries<T>,
    k: usize,
) -> Result<GrangerResult<T>, StatsError> {
    ensure_aligned(x, y)?;
    if k == 0 {
        return Err(StatsError::InvalidArgument("lag depth must be at least 1".into()));
    }
    // longest stretch where both series are observed
    let joint = WeeklySeries {
        start_week: x.start_week,
        values: x.values.iter().zip(&y.values).map(|(a, b)| a.and(*b)).collect(),
        label: String::new(),
    };
    let (offset, len) = joint.longest_observed_run();
    let xs: Vec<T> = (offset..offset + len).map(|i| x.get(i).expect("observed")).collect();
    let ys: Vec<T> = (offset..offset + len).map(|i| y.get(i).expect("observed")).collect();

    let n_obs = len.saturating_sub(k);
    let df_den = n_obs.saturating_sub(2 * k + 1);
    if len <= k || df_den < MIN_RESIDUAL_DF {
        return Err(StatsError::TooShort { needed: 3 * k + 1 + MIN_RESIDUAL_DF, got: len });
    }

    let target: Vec<T> = ys[k..].to_vec();
    let mut restricted: Vec<Vec<T>> = (1..=k).map(|l| lagged(&ys, k, l)).collect();
    let fit_r = ols_fit(&target, &DesignMatrix::with_intercept(&restricted)?)?;
    restricted.extend((1..=k).map(|l| lagged(&xs, k, l)));
    let fit_u = ols_fit(&target, &DesignMatrix::with_intercept(&restricted)?)?;

    let (rss_r, rss_u) = (fit_r.rss, fit_u.rss);
    let coverage = len as f64 / x.len() as f64;
    let scale = target.iter().map(|v| *v * *v).sum::<T>();
    let perfect = rss_u <= scale * T::epsilon() * T::from_count(n_obs);
    let (f_stat, p_value) = if perfect {
        if rss_r <= scale * T::epsilon() * T::from_count(n_obs) {
            return Err(StatsError::Degenerate("target is fit exactly by its own lags".into()));
        }
        (T::infinity(), T::zero())
    } else {
        let num = (rss_r - rss_u).max(T::zero()) / T::from_count(k);
        let f = num / (rss_u / T::from_count(df_den));
        (f, f_sf(f, T::from_count(k), T::from_count(df_den)))
    };
    Ok(GrangerResult {
        lags: k,
        f_stat,
        p_value,
        n_obs,
        df_num: k,
        df_den,
        rss_restricted: rss_r,
        rss_unrestricted: rss_u,
        degenerate_fit: perfect,
        coverage,
        short_run_warning: coverage < MIN_COVERAGE,
    })
}

/// How the tweet signal enters the sweep.
#[derive(Debug, Clone, Copy)]
pub enum SignalTransform<'a, T> {
    /// Raw weekly counts.
    Count,
    /// Counts divided by the weekly total in the given series.
    Fraction(&'a WeeklySeries<T>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry<T> {
    pub k: usize,
    pub result: Result<GrangerResult<T>, String>,
}

/// Runs [`granger_test`] for every lag depth in `ks` after the requested
/// transform and optional first differencing of both series. Per-depth
/// failures are recorded and the sweep continues.
pub fn granger_sweep<T: Real>(
    x: &WeeklySeries<T>,
    y: &WeeklySeries<T>,
    ks: impl IntoIterator<Item = usize>,
    transform: SignalTransform<'_, T>,
    difference_first: bool,
) -> Result<Vec<SweepEntry<T>>, StatsError> {
    let signal = match transform {
        SignalTransform::Count => x.clone(),
        SignalTransform::Fraction(total) => fraction_series(x, total)?,
    };
    let (signal, target) = if difference_first {
        (difference(&signal)?, difference(y)?)
    } else {
        (signal, y.clone())
    };
    ensure_aligned(&signal, &target)?;
    Ok(ks
        .into_iter()
        .map(|k| SweepEntry { k, result: granger_test(&signal, &target, k).map_err(|e| e.to_string()) })
        .collect())
}

/// Smallest lag depth significant at `alpha`, if any.
pub fn first_significant<T: Real>(entries: &[SweepEntry<T>], alpha: f64) -> Option<usize> {
    entries
        .iter()
        .find(|e| e.result.as_ref().is_ok_and(|r| r.p_value.as_f64() < alpha))
        .map(|e| e.k)
}

/// Sweep as CSV: `k,F,p,n_eff,flag`.
pub fn write_sweep_csv<T: Real, W: Write>(entries: &[SweepEntry<T>], alpha: f64, w: W) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["k", "F", "p", "n_eff", "flag"])?;
    for e in entries {
        let rec = match &e.result {
            Ok(r) => {
                let flag = if r.degenerate_fit {
                    "degenerate_fit".to_string()
                } else if r.p_value.as_f64() < alpha {
                    "significant".to_string()
                } else {
                    String::new()
                };
                [
                    e.k.to_string(),
                    format!("{:.6}", r.f_stat.as_f64()),
                    format!("{:.6e}", r.p_value.as_f64()),
                    r.n_obs.to_string(),
                    flag,
                ]
            }
            Err(msg) => [e.k.to_string(), "NA".into(), "NA".into(), "NA".into(), format!("error: {msg}")],
        };
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}
