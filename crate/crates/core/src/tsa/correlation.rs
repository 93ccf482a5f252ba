//! Pearson correlation between weekly tweet counts and sales at lags.
//!
//! Lag `l` pairs tweets in week `t` with sales in week `t + l`, so positive
//! lags look at sales after the tweets.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::dist::student_t_two_sided;
use super::StatsError;
use crate::scalar::Real;
use crate::series::{ensure_aligned, WeeklySeries};

/// Correlations at or above this magnitude are flagged as moderate.
pub const MODERATE_THRESHOLD: f64 = 0.3;

pub const DEFAULT_MAX_LAG: i32 = 4;

/// Product-moment correlation of two equal-length samples.
pub fn pearson<T: Real>(x: &[T], y: &[T]) -> Result<T, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.len() < 3 {
        return Err(StatsError::TooShort { needed: 3, got: x.len() });
    }
    let n = T::from_count(x.len());
    let mx = x.iter().copied().sum::<T>() / n;
    let my = y.iter().copied().sum::<T>() / n;
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy = sxy + da * db;
        sxx = sxx + da * da;
        syy = syy + db * db;
    }
    if sxx <= T::zero() || syy <= T::zero() {
        return Err(StatsError::Degenerate("degenerate series".into()));
    }
    let r = sxy / (sxx.sqrt() * syy.sqrt());
    Ok(r.max(-T::one()).min(T::one()))
}

/// Pearson over pairs where both values are observed; returns `(r, n_pairs)`.
pub fn pearson_pairwise<T: Real>(x: &[Option<T>], y: &[Option<T>]) -> Result<(T, usize), StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch { left: x.len(), right: y.len() });
    }
    let (xs, ys): (Vec<T>, Vec<T>) = x.iter().zip(y).filter_map(|(a, b)| Some(((*a)?, (*b)?))).unzip();
    let n = xs.len();
    Ok((pearson(&xs, &ys)?, n))
}

/// Two-sided p-value of `r` from `n` pairs, via the t statistic with
/// `n - 2` degrees of freedom.
pub fn correlation_p_value<T: Real>(r: T, n: usize) -> T {
    if n < 3 {
        return T::nan();
    }
    let one = T::one();
    if r.abs() >= one {
        return T::zero();
    }
    let df = T::from_count(n - 2);
    let t = r * (df / (one - r * r)).sqrt();
    student_t_two_sided(t, df)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagCorrelation<T> {
    pub r: Option<T>,
    pub p_value: Option<T>,
    pub n_pairs: usize,
    /// Why `r` is unavailable, when it is.
    pub unavailable: Option<String>,
}

/// Correlation of tweets at `t` with sales at `t + lag` for every lag in
/// `-max_lag..=max_lag`.
pub fn lagged_correlation<T: Real>(
    tweets: &WeeklySeries<T>,
    sales: &WeeklySeries<T>,
    max_lag: i32,
) -> Result<BTreeMap<i32, LagCorrelation<T>>, StatsError> {
    ensure_aligned(tweets, sales)?;
    let n = tweets.len() as i64;
    let mut out = BTreeMap::new();
    for lag in -max_lag..=max_lag {
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for t in 0..n {
            let s = t + i64::from(lag);
            if s < 0 || s >= n {
                continue;
            }
            if let (Some(a), Some(b)) = (tweets.get(t as usize), sales.get(s as usize)) {
                xs.push(a);
                ys.push(b);
            }
        }
        let entry = match pearson(&xs, &ys) {
            Ok(r) => LagCorrelation {
                r: Some(r),
                p_value: Some(correlation_p_value(r, xs.len())),
                n_pairs: xs.len(),
                unavailable: None,
            },
            Err(e) => LagCorrelation { r: None, p_value: None, n_pairs: xs.len(), unavailable: Some(e.to_string()) },
        };
        out.insert(lag, entry);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow<T> {
    pub filter: String,
    pub lags: BTreeMap<i32, LagCorrelation<T>>,
    pub moderate_lags: Vec<i32>,
    /// No lag produced a correlation.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix<T> {
    pub rows: Vec<CorrelationRow<T>>,
    pub n_weeks: usize,
    pub max_lag: i32,
    pub threshold: f64,
}

/// One correlation row per tweet series, in input order; each series label
/// names its filter.
pub fn correlation_table<T: Real>(
    tweet_rows: &[WeeklySeries<T>],
    sales: &WeeklySeries<T>,
    max_lag: i32,
) -> Result<CorrelationMatrix<T>, StatsError> {
    let threshold = T::lit(MODERATE_THRESHOLD);
    let mut rows = Vec::with_capacity(tweet_rows.len());
    for series in tweet_rows {
        let lags = lagged_correlation(series, sales, max_lag)?;
        let moderate_lags = lags
            .iter()
            .filter(|(_, c)| c.r.is_some_and(|r| r.abs() >= threshold))
            .map(|(&l, _)| l)
            .collect();
        let degenerate = lags.values().all(|c| c.r.is_none());
        rows.push(CorrelationRow { filter: series.label.clone(), lags, moderate_lags, degenerate });
    }
    Ok(CorrelationMatrix { rows, n_weeks: sales.len(), max_lag, threshold: MODERATE_THRESHOLD })
}

fn fmt_opt<T: Real>(v: Option<T>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{:.6}", x.as_f64()))
}

fn fmt_lag(l: i32) -> String {
    if l > 0 {
        format!("+{l}")
    } else {
        l.to_string()
    }
}

impl<T: Real> CorrelationRow<T> {
    pub fn flags(&self) -> String {
        if self.degenerate {
            "degenerate".to_string()
        } else {
            self.moderate_lags.iter().map(|&l| fmt_lag(l)).collect::<Vec<_>>().join(";")
        }
    }
}

impl<T: Real> CorrelationMatrix<T> {
    fn write_table<W: Write>(&self, w: W, value: impl Fn(&LagCorrelation<T>) -> Option<T>) -> csv::Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["filter".to_string()];
        header.extend((-self.max_lag..=self.max_lag).map(|l| format!("lag_{l}")));
        header.extend(["n".to_string(), "flags".to_string()]);
        wtr.write_record(&header)?;
        for row in &self.rows {
            let mut rec = vec![row.filter.clone()];
            rec.extend((-self.max_lag..=self.max_lag).map(|l| fmt_opt(row.lags.get(&l).and_then(&value))));
            rec.push(row.lags.get(&0).map_or(0, |c| c.n_pairs).to_string());
            rec.push(row.flags());
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Correlations as CSV: `filter,lag_-4..lag_4,n,flags`.
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        self.write_table(w, |c| c.r)
    }

    /// Same layout as [`Self::write_csv`] with p-values in the lag columns.
    pub fn write_p_values_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        self.write_table(w, |c| c.p_value)
    }
}
