//! Peak-week event studies.
//!
//! Weeks with the most tweets are events. For each event week `e`, normal
//! sales are the mean over the `L` weeks before it, abnormal sales are the
//! deviations from that level in weeks `e..=e+w`, and their sum is the
//! event's cumulative abnormal sales (CAR). A Student-t test over the CARs
//! decides whether sales rose after peaks.

use std::collections::HashSet;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::TweetRecord;
use crate::scalar::{mean, sample_variance, Real};
use crate::series::{ensure_aligned, SeriesError, WeekRange, WeeklySeries};
use crate::tsa::dist::{student_t_sf, student_t_two_sided};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EventError {
    #[error("invalid event-study configuration: {0}")]
    InvalidConfig(String),
    #[error("series too short: need {needed} weeks, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("no peaks distinguishable")]
    NoDistinctPeaks,
    #[error("insufficient events: {usable} usable, need at least 2")]
    InsufficientEvents { usable: usize },
    #[error("degenerate CARs")]
    DegenerateCars,
    #[error("no comparison group: {0}")]
    NoComparisonGroup(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventStudyConfig {
    /// Peaks are the top `1 - quantile` share of weeks.
    pub quantile: f64,
    /// Weeks after the event week included in the event window.
    pub event_window: usize,
    /// Weeks before the event used for normal sales.
    pub estimation_window: usize,
    pub merge_adjacent: bool,
    pub one_sided: bool,
}

impl Default for EventStudyConfig {
    fn default() -> Self {
        Self { quantile: 0.90, event_window: 3, estimation_window: 6, merge_adjacent: true, one_sided: true }
    }
}

impl EventStudyConfig {
    pub fn validate(&self) -> Result<(), EventError> {
        if !(self.quantile > 0.0 && self.quantile < 1.0) {
            return Err(EventError::InvalidConfig(format!("quantile {} outside (0, 1)", self.quantile)));
        }
        if self.estimation_window == 0 {
            return Err(EventError::InvalidConfig("estimation window must be at least 1 week".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event<T> {
    pub week: usize,
    pub tweet_value: T,
    /// Selected weeks merged into this event.
    pub run_length: usize,
    pub usable: bool,
    pub exclusion_reason: Option<String>,
}

/// Number of peak weeks selected from `n` weeks at `quantile`.
pub fn peak_count(n: usize, quantile: f64) -> usize {
    // the epsilon keeps e.g. (1 - 0.8) * 10 from flooring to 1
    (((1.0 - quantile) * n as f64 + 1e-9).floor() as usize).max(1)
}

/// Selects the `peak_count` highest weeks, earlier weeks winning ties, and
/// optionally merges runs of consecutive selected weeks into their first week.
pub fn detect_peak_weeks<T: Real>(
    tweets: &WeeklySeries<T>,
    quantile: f64,
    merge_adjacent: bool,
) -> Result<Vec<Event<T>>, EventError> {
    if !(quantile > 0.0 && quantile < 1.0) {
        return Err(EventError::InvalidConfig(format!("quantile {quantile} outside (0, 1)")));
    }
    let observed: Vec<(usize, T)> =
        tweets.values.iter().enumerate().filter_map(|(i, v)| v.map(|v| (i, v))).collect();
    if observed.len() < 2 {
        return Err(EventError::TooShort { needed: 2, got: observed.len() });
    }
    let first = observed[0].1;
    if observed.iter().all(|&(_, v)| v == first) {
        return Err(EventError::NoDistinctPeaks);
    }
    let k = peak_count(tweets.len(), quantile).min(observed.len());
    let mut ranked = observed;
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal).then(a.0.cmp(&b.0)));
    let mut weeks: Vec<(usize, T)> = ranked.into_iter().take(k).collect();
    weeks.sort_by_key(|&(i, _)| i);

    let mut events: Vec<Event<T>> = Vec::with_capacity(weeks.len());
    for (week, value) in weeks {
        if merge_adjacent {
            if let Some(last) = events.last_mut() {
                if last.week + last.run_length == week {
                    last.run_length += 1;
                    continue;
                }
            }
        }
        events.push(Event { week, tweet_value: value, run_length: 1, usable: true, exclusion_reason: None });
    }
    Ok(events)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventOutcome<T> {
    pub week: usize,
    pub normal_sales: T,
    /// Abnormal sales for offsets `0..=event_window`.
    pub abnormal: Vec<T>,
    pub car: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventStudyResult<T> {
    pub config: EventStudyConfig,
    pub events: Vec<Event<T>>,
    /// One entry per usable event, in week order.
    pub outcomes: Vec<EventOutcome<T>>,
    pub mean_car: T,
    pub sd_car: T,
    pub t_statistic: T,
    pub p_value: T,
    pub n_usable: usize,
    pub n_excluded: usize,
    /// Pairs of usable events whose estimation-plus-event spans overlap.
    pub overlapping_pairs: usize,
    /// Every CAR is identical and nonzero, so the t statistic is infinite.
    pub uniform_effect: bool,
}

pub fn event_study<T: Real>(
    sales: &WeeklySeries<T>,
    events: &[Event<T>],
    cfg: &EventStudyConfig,
) -> Result<EventStudyResult<T>, EventError> {
    cfg.validate()?;
    let (w, l) = (cfg.event_window, cfg.estimation_window);
    let n = sales.len();
    let mut marked = Vec::with_capacity(events.len());
    let mut outcomes = Vec::new();
    for ev in events {
        let e = ev.week;
        let reason = if e < l {
            Some("estimation window starts before the series".to_string())
        } else if e + w >= n {
            Some("event window runs past the series end".to_string())
        } else if (e - l..=e + w).any(|i| sales.get(i).is_none()) {
            Some("missing sales in window".to_string())
        } else {
            None
        };
        if reason.is_none() {
            let window: Vec<T> = (e - l..e).map(|i| sales.get(i).expect("checked")).collect();
            let normal = mean(&window);
            let abnormal: Vec<T> = (e..=e + w).map(|i| sales.get(i).expect("checked") - normal).collect();
            let car = abnormal.iter().copied().sum();
            outcomes.push(EventOutcome { week: e, normal_sales: normal, abnormal, car });
        }
        marked.push(Event { usable: reason.is_none(), exclusion_reason: reason, ..ev.clone() });
    }

    let n_usable = outcomes.len();
    if n_usable < 2 {
        return Err(EventError::InsufficientEvents { usable: n_usable });
    }
    let cars: Vec<T> = outcomes.iter().map(|o| o.car).collect();
    let mean_car = mean(&cars);
    let sd_car = sample_variance(&cars).expect("two or more CARs").sqrt();
    let df = T::from_count(n_usable - 1);
    let (t_statistic, p_value, uniform_effect) = if sd_car == T::zero() {
        if mean_car == T::zero() {
            return Err(EventError::DegenerateCars);
        }
        let t = if mean_car > T::zero() { T::infinity() } else { T::neg_infinity() };
        let p = if cfg.one_sided && mean_car < T::zero() { T::one() } else { T::zero() };
        (t, p, true)
    } else {
        let t = mean_car * T::from_count(n_usable).sqrt() / sd_car;
        let p = if cfg.one_sided { student_t_sf(t, df) } else { student_t_two_sided(t, df) };
        (t, p, false)
    };

    let span = |o: &EventOutcome<T>| (o.week - l, o.week + w);
    let mut overlapping_pairs = 0;
    for (i, a) in outcomes.iter().enumerate() {
        for b in &outcomes[i + 1..] {
            let ((a0, a1), (b0, b1)) = (span(a), span(b));
            if a0 <= b1 && b0 <= a1 {
                overlapping_pairs += 1;
            }
        }
    }

    Ok(EventStudyResult {
        config: *cfg,
        n_excluded: marked.len() - n_usable,
        events: marked,
        outcomes,
        mean_car,
        sd_car,
        t_statistic,
        p_value,
        n_usable,
        overlapping_pairs,
        uniform_effect,
    })
}

/// Detects peaks in `tweets` and runs the event study on `sales`.
pub fn run_event_study<T: Real>(
    tweets: &WeeklySeries<T>,
    sales: &WeeklySeries<T>,
    cfg: &EventStudyConfig,
) -> Result<EventStudyResult<T>, EventError> {
    ensure_aligned(tweets, sales)?;
    cfg.validate()?;
    let events = detect_peak_weeks(tweets, cfg.quantile, cfg.merge_adjacent)?;
    event_study(sales, &events, cfg)
}

/// Rounds to six decimals, the precision of emitted reports.
pub fn report_fixed(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    let r = (x * 1e6).round() / 1e6;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Rounds to seven significant digits, the precision of emitted p-values.
pub fn report_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.6e}").parse().expect("formatted float parses")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEvent {
    pub week: usize,
    pub week_start: String,
    pub tweet_value: f64,
    pub run_length: usize,
    pub usable: bool,
    pub exclusion_reason: Option<String>,
}

/// Event-study result at report precision, ready for JSON output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventStudyReport {
    pub config: EventStudyConfig,
    pub events: Vec<ReportEvent>,
    pub outcome_weeks: Vec<usize>,
    pub normal_sales: Vec<f64>,
    /// Rows are usable events, columns offsets `0..=event_window`.
    pub abnormal_sales: Vec<Vec<f64>>,
    pub cars: Vec<f64>,
    pub mean_car: f64,
    /// `null` when infinite (uniform effect).
    pub t_statistic: Option<f64>,
    pub p_value: f64,
    pub n_usable: usize,
    pub n_excluded: usize,
    pub overlapping_pairs: usize,
    pub uniform_effect: bool,
}

impl<T: Real> EventStudyResult<T> {
    pub fn to_report(&self, sales: &WeeklySeries<T>) -> EventStudyReport {
        let fx = |v: T| report_fixed(v.as_f64());
        EventStudyReport {
            config: self.config,
            events: self
                .events
                .iter()
                .map(|e| ReportEvent {
                    week: e.week,
                    week_start: sales.week_start(e.week).to_string(),
                    tweet_value: fx(e.tweet_value),
                    run_length: e.run_length,
                    usable: e.usable,
                    exclusion_reason: e.exclusion_reason.clone(),
                })
                .collect(),
            outcome_weeks: self.outcomes.iter().map(|o| o.week).collect(),
            normal_sales: self.outcomes.iter().map(|o| fx(o.normal_sales)).collect(),
            abnormal_sales: self.outcomes.iter().map(|o| o.abnormal.iter().map(|&a| fx(a)).collect()).collect(),
            cars: self.outcomes.iter().map(|o| fx(o.car)).collect(),
            mean_car: fx(self.mean_car),
            t_statistic: self.t_statistic.is_finite().then(|| fx(self.t_statistic)),
            p_value: report_sig(self.p_value.as_f64()),
            n_usable: self.n_usable,
            n_excluded: self.n_excluded,
            overlapping_pairs: self.overlapping_pairs,
            uniform_effect: self.uniform_effect,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub quantile: f64,
    pub event_window: usize,
    pub estimation_window: usize,
    pub t_statistic: Option<f64>,
    pub p_value: Option<f64>,
    pub n_usable: usize,
    pub significant: bool,
    pub error: Option<String>,
}

/// Largest block of significant cells anchored at the smallest event and
/// estimation windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustRegion {
    /// `None` for the region spanning every quantile.
    pub quantile: Option<f64>,
    pub max_event_window: Option<usize>,
    pub max_estimation_window: Option<usize>,
    pub n_cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessGrid {
    pub alpha: f64,
    pub cells: Vec<GridCell>,
    pub overall: RobustRegion,
    pub per_quantile: Vec<RobustRegion>,
}

pub fn robustness_sweep<T: Real>(
    tweets: &WeeklySeries<T>,
    sales: &WeeklySeries<T>,
    quantiles: &[f64],
    event_windows: &[usize],
    estimation_windows: &[usize],
    base: &EventStudyConfig,
    alpha: f64,
) -> Result<RobustnessGrid, EventError> {
    ensure_aligned(tweets, sales)?;
    let mut cells = Vec::with_capacity(quantiles.len() * event_windows.len() * estimation_windows.len());
    for &q in quantiles {
        let events = detect_peak_weeks(tweets, q, base.merge_adjacent);
        for &w in event_windows {
            for &l in estimation_windows {
                let cfg = EventStudyConfig { quantile: q, event_window: w, estimation_window: l, ..*base };
                let outcome = events.as_ref().map_err(Clone::clone).and_then(|ev| event_study(sales, ev, &cfg));
                cells.push(match outcome {
                    Ok(r) => GridCell {
                        quantile: q,
                        event_window: w,
                        estimation_window: l,
                        t_statistic: r.t_statistic.is_finite().then(|| r.t_statistic.as_f64()),
                        p_value: Some(r.p_value.as_f64()),
                        n_usable: r.n_usable,
                        significant: r.p_value.as_f64() < alpha,
                        error: None,
                    },
                    Err(e) => GridCell {
                        quantile: q,
                        event_window: w,
                        estimation_window: l,
                        t_statistic: None,
                        p_value: None,
                        n_usable: match e {
                            EventError::InsufficientEvents { usable } => usable,
                            _ => 0,
                        },
                        significant: false,
                        error: Some(e.to_string()),
                    },
                });
            }
        }
    }
    let overall = robust_region(&cells, None, event_windows, estimation_windows);
    let per_quantile =
        quantiles.iter().map(|&q| robust_region(&cells, Some(q), event_windows, estimation_windows)).collect();
    Ok(RobustnessGrid { alpha, cells, overall, per_quantile })
}

fn robust_region(cells: &[GridCell], quantile: Option<f64>, ws: &[usize], ls: &[usize]) -> RobustRegion {
    let mut ws = ws.to_vec();
    let mut ls = ls.to_vec();
    ws.sort_unstable();
    ws.dedup();
    ls.sort_unstable();
    ls.dedup();
    let ok = |w: usize, l: usize| {
        let mut matching = cells
            .iter()
            .filter(|c| c.event_window == w && c.estimation_window == l)
            .filter(|c| quantile.is_none_or(|q| c.quantile == q))
            .peekable();
        matching.peek().is_some() && matching.all(|c| c.significant)
    };
    let mut best: Option<(usize, usize)> = None;
    let mut best_area = 0;
    let mut l_limit = ls.len();
    for (i, &w) in ws.iter().enumerate() {
        // rows must stay significant for every smaller event window too
        let run = ls[..l_limit].iter().take_while(|&&l| ok(w, l)).count();
        l_limit = run;
        if run == 0 {
            break;
        }
        let area = (i + 1) * run;
        if area >= best_area {
            best_area = area;
            best = Some((i, run - 1));
        }
    }
    RobustRegion {
        quantile,
        max_event_window: best.map(|(i, _)| ws[i]),
        max_estimation_window: best.map(|(_, j)| ls[j]),
        n_cells: best_area,
    }
}

impl RobustnessGrid {
    /// Grid as CSV: `q,w,L,t,p,n_usable,significant`.
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["q", "w", "L", "t", "p", "n_usable", "significant"])?;
        for c in &self.cells {
            wtr.write_record([
                format!("{}", c.quantile),
                c.event_window.to_string(),
                c.estimation_window.to_string(),
                c.t_statistic.map_or_else(|| "NA".into(), |t| format!("{t:.6}")),
                c.p_value.map_or_else(|| "NA".into(), |p| format!("{p:.6e}")),
                c.n_usable.to_string(),
                c.significant.to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReachStats {
    pub mean_followers_peak_weeks: f64,
    pub mean_followers_average_weeks: f64,
    /// Peak over average; `None` when the average is zero.
    pub ratio: Option<f64>,
    pub n_peak_weeks_with_tweets: usize,
    pub n_average_weeks_with_tweets: usize,
}

/// Mean weekly follower reach of `tweets` in peak weeks versus other weeks,
/// each averaged over weeks that contain at least one tweet.
pub fn reach_stats(tweets: &[TweetRecord], range: &WeekRange, peak_weeks: &[usize]) -> Result<ReachStats, EventError> {
    let peaks: HashSet<usize> = peak_weeks.iter().copied().filter(|&w| w < range.n_weeks()).collect();
    if peaks.is_empty() {
        return Err(EventError::NoComparisonGroup("no peak weeks".into()));
    }
    if peaks.len() == range.n_weeks() {
        return Err(EventError::NoComparisonGroup("every week is a peak week".into()));
    }
    let mut reach: Vec<Option<u64>> = vec![None; range.n_weeks()];
    for t in tweets {
        if let Some(i) = range.index_of(&t.created_at) {
            *reach[i].get_or_insert(0) += t.followers;
        }
    }
    let group_mean = |in_peak: bool| {
        let sums: Vec<f64> = reach
            .iter()
            .enumerate()
            .filter(|(i, _)| peaks.contains(i) == in_peak)
            .filter_map(|(_, r)| r.map(|v| v as f64))
            .collect();
        let m = if sums.is_empty() { 0.0 } else { sums.iter().sum::<f64>() / sums.len() as f64 };
        (m, sums.len())
    };
    let (peak_mean, n_peak) = group_mean(true);
    let (avg_mean, n_avg) = group_mean(false);
    Ok(ReachStats {
        mean_followers_peak_weeks: peak_mean,
        mean_followers_average_weeks: avg_mean,
        ratio: (avg_mean > 0.0).then(|| peak_mean / avg_mean),
        n_peak_weeks_with_tweets: n_peak,
        n_average_weeks_with_tweets: n_avg,
    })
}
