//! Time-series statistics relating weekly tweet counts to sales: lagged
//! correlation, differencing, stationarity testing and Granger causality.

pub mod adf;
pub mod correlation;
pub mod dist;
pub mod granger;
pub mod ols;
pub mod transform;

use chrono::NaiveDate;
use thiserror::Error;

use crate::series::SeriesError;

pub use adf::adf_test;
pub use correlation::{correlation_table, lagged_correlation, pearson, pearson_pairwise};
pub use granger::{granger_sweep, granger_test, SignalTransform};
pub use ols::{ols_fit, DesignMatrix};
pub use transform::{difference, fraction_series};

/// Below this share of usable weeks, ADF and Granger results carry a warning.
pub const MIN_COVERAGE: f64 = 0.8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("too few observations: need {needed}, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("{0}")]
    Degenerate(String),
    #[error("collinear regressors (column {column} is linearly dependent)")]
    RankDeficient { column: usize },
    #[error("non-finite value in regression input")]
    NonFinite,
    #[error("numerator exceeds denominator in week {week}")]
    SubsetViolation { week: NaiveDate },
    #[error("{0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
}
