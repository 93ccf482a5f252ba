//! Tweets-to-sales signal analysis.
//!
//! The pipeline filters tweets to one country, classifies them with
//! language-independent features, aggregates weekly counts per class and
//! relates them to weekly sales through lagged correlation, Granger tests and
//! peak-week event studies. [`synth`] produces datasets with a known causal
//! structure so every stage can be checked against ground truth.
//!
//! The statistics are generic over [`Real`]; the aliases below fix the
//! scalar to `f64` (or `f32` where noted).

pub mod classify;
pub mod events;
pub mod ingest;
pub mod scalar;
pub mod series;
pub mod synth;
pub mod tsa;

pub use scalar::Real;
pub use series::{WeekRange, WeeklySeries};

pub type Series = series::WeeklySeries<f64>;
pub type Series32 = series::WeeklySeries<f32>;
pub type OlsFit = tsa::ols::OlsFit<f64>;
pub type AdfResult = tsa::adf::AdfResult<f64>;
pub type GrangerResult = tsa::granger::GrangerResult<f64>;
pub type LagCorrelation = tsa::correlation::LagCorrelation<f64>;
pub type CorrelationMatrix = tsa::correlation::CorrelationMatrix<f64>;
pub type Event = events::Event<f64>;
pub type EventStudyResult = events::EventStudyResult<f64>;
