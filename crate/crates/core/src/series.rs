//! Week-indexed series and ISO-week calendar helpers.
//!
//! Weeks start on Monday 00:00 UTC. A [`WeeklySeries`] covers consecutive
//! weeks without gaps; unobserved weeks hold `None`.

use chrono::{DateTime, Datelike, Duration, NaiveDate, Utc, Weekday};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("{0} is not a Monday")]
    NotMonday(NaiveDate),
    #[error("series must hold at least one week")]
    Empty,
    #[error("range start {start} is after end {end}")]
    InvertedRange { start: NaiveDate, end: NaiveDate },
    #[error("no overlap between week ranges")]
    NoOverlap,
    #[error("series are not aligned: {0}")]
    NotAligned(String),
}

/// Monday of the ISO week containing `date`.
pub fn monday_of(date: NaiveDate) -> NaiveDate {
    date - Duration::days(i64::from(date.weekday().num_days_from_monday()))
}

/// A span of whole ISO weeks, identified by its first Monday.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeekRange {
    first: NaiveDate,
    n_weeks: usize,
}

impl WeekRange {
    /// All weeks touched by the dates `start..=end`.
    pub fn from_dates(start: NaiveDate, end: NaiveDate) -> Result<Self, SeriesError> {
        if start > end {
            return Err(SeriesError::InvertedRange { start, end });
        }
        let first = monday_of(start);
        let last = monday_of(end);
        let n_weeks = ((last - first).num_days() / 7) as usize + 1;
        Ok(Self { first, n_weeks })
    }

    pub fn new(first: NaiveDate, n_weeks: usize) -> Result<Self, SeriesError> {
        if first.weekday() != Weekday::Mon {
            return Err(SeriesError::NotMonday(first));
        }
        if n_weeks == 0 {
            return Err(SeriesError::Empty);
        }
        Ok(Self { first, n_weeks })
    }

    pub fn first_week(&self) -> NaiveDate {
        self.first
    }

    pub fn n_weeks(&self) -> usize {
        self.n_weeks
    }

    pub fn week_start(&self, index: usize) -> NaiveDate {
        self.first + Duration::weeks(index as i64)
    }

    /// Week index of a calendar date, if inside the range.
    pub fn index_of_date(&self, date: NaiveDate) -> Option<usize> {
        let days = (date - self.first).num_days();
        if days < 0 {
            return None;
        }
        let idx = (days / 7) as usize;
        (idx < self.n_weeks).then_some(idx)
    }

    /// Week index of a UTC instant, if inside the range.
    pub fn index_of(&self, ts: &DateTime<Utc>) -> Option<usize> {
        self.index_of_date(ts.date_naive())
    }
}

/// Consecutive weekly values starting at a Monday.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeeklySeries<T> {
    pub start_week: NaiveDate,
    pub values: Vec<Option<T>>,
    pub label: String,
}

impl<T: Real> WeeklySeries<T> {
    pub fn new(
        start_week: NaiveDate,
        values: Vec<Option<T>>,
        label: impl Into<String>,
    ) -> Result<Self, SeriesError> {
        if start_week.weekday() != Weekday::Mon {
            return Err(SeriesError::NotMonday(start_week));
        }
        if values.is_empty() {
            return Err(SeriesError::Empty);
        }
        Ok(Self { start_week, values, label: label.into() })
    }

    /// Series with every week observed.
    pub fn from_values(
        start_week: NaiveDate,
        values: &[T],
        label: impl Into<String>,
    ) -> Result<Self, SeriesError> {
        Self::new(start_week, values.iter().copied().map(Some).collect(), label)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn range(&self) -> WeekRange {
        WeekRange { first: self.start_week, n_weeks: self.values.len() }
    }

    pub fn week_start(&self, index: usize) -> NaiveDate {
        self.start_week + Duration::weeks(index as i64)
    }

    pub fn get(&self, index: usize) -> Option<T> {
        self.values.get(index).copied().flatten()
    }

    pub fn n_missing(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    /// Non-missing values in week order.
    pub fn observed(&self) -> Vec<T> {
        self.values.iter().filter_map(|v| *v).collect()
    }

    /// Every value, with missing weeks as NaN.
    pub fn to_dense(&self) -> Vec<T> {
        self.values.iter().map(|v| v.unwrap_or_else(T::nan)).collect()
    }

    pub fn max_observed(&self) -> Option<T> {
        self.values.iter().filter_map(|v| *v).fold(None, |acc, v| match acc {
            Some(m) if m >= v => Some(m),
            _ => Some(v),
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            start_week: self.start_week,
            values: self.values.iter().map(|v| v.map(&f)).collect(),
            label: self.label.clone(),
        }
    }

    /// Sub-series of `len` weeks starting at week `offset`.
    pub fn slice(&self, offset: usize, len: usize) -> Result<Self, SeriesError> {
        if len == 0 || offset + len > self.values.len() {
            return Err(SeriesError::Empty);
        }
        Ok(Self {
            start_week: self.week_start(offset),
            values: self.values[offset..offset + len].to_vec(),
            label: self.label.clone(),
        })
    }

    /// Longest run of consecutive observed weeks as `(offset, len)`; the
    /// earliest run wins ties.
    pub fn longest_observed_run(&self) -> (usize, usize) {
        let mut best = (0, 0);
        let mut start = 0;
        for (i, v) in self.values.iter().enumerate() {
            if v.is_none() {
                start = i + 1;
                continue;
            }
            let len = i + 1 - start;
            if len > best.1 {
                best = (start, len);
            }
        }
        best
    }

    /// True when both series cover the same weeks.
    pub fn is_aligned_with<U: Real>(&self, other: &WeeklySeries<U>) -> bool {
        self.start_week == other.start_week && self.len() == other.len()
    }
}

/// Fails unless `a` and `b` cover the same weeks.
pub(crate) fn ensure_aligned<T: Real, U: Real>(
    a: &WeeklySeries<T>,
    b: &WeeklySeries<U>,
) -> Result<(), SeriesError> {
    if a.is_aligned_with(b) {
        Ok(())
    } else {
        Err(SeriesError::NotAligned(format!(
            "'{}' starts {} with {} weeks, '{}' starts {} with {} weeks",
            a.label,
            a.start_week,
            a.len(),
            b.label,
            b.start_week,
            b.len()
        )))
    }
}
