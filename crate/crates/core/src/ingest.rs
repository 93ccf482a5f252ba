//! Tweet, sales and label file parsing, country filtering and weekly
//! aggregation.

use std::collections::HashSet;
use std::io::{BufRead, Read, Write};

use chrono::{DateTime, Datelike, NaiveDate, Utc, Weekday};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::labels::{ClassLabel, RawSentiment, RawTriple, RawTweetType, RawUserType};
use crate::scalar::Real;
use crate::series::{SeriesError, WeekRange, WeeklySeries};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: missing field {field}")]
    MissingField { line: usize, field: &'static str },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: duplicate tweet id '{id}'")]
    DuplicateId { line: usize, id: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("series has no observed values")]
    AllMissing,
    #[error("non-positive maximum")]
    NonPositiveMaximum,
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// One raw tweet with the metadata of its author.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub id: String,
    pub text: String,
    pub created_at: DateTime<Utc>,
    pub user_name: String,
    pub user_screen_name: String,
    pub followers: u64,
    pub friends: u64,
    pub statuses_count: u64,
    pub retweet_count: u64,
    pub is_retweet: bool,
    pub user_timezone: String,
    pub language: String,
}

/// Field names of the tweet formats, in column order.
pub const TWEET_FIELDS: [&str; 12] = [
    "id",
    "text",
    "created_at",
    "user_name",
    "user_screen_name",
    "followers",
    "friends",
    "statuses_count",
    "retweet_count",
    "is_retweet",
    "user_timezone",
    "language",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TweetFormat {
    JsonLines,
    Csv,
}

/// A country, identified on Twitter by language and capital-city time zone.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountrySpec {
    pub name: String,
    pub language: String,
    pub capital: String,
}

impl CountrySpec {
    pub fn new(name: impl Into<String>, language: impl Into<String>, capital: impl Into<String>) -> Self {
        Self { name: name.into(), language: language.into(), capital: capital.into() }
    }

    /// The four countries of the original case study.
    pub fn preset(name: &str) -> Option<Self> {
        let (n, l, c) = match name.to_lowercase().as_str() {
            "netherlands" | "nl" => ("Netherlands", "nl", "Amsterdam"),
            "spain" | "es" => ("Spain", "es", "Madrid"),
            "germany" | "de" => ("Germany", "de", "Berlin"),
            "france" | "fr" => ("France", "fr", "Paris"),
            _ => return None,
        };
        Some(Self::new(n, l, c))
    }

    pub fn matches(&self, tweet: &TweetRecord) -> bool {
        tweet.language.to_lowercase() == self.language.to_lowercase()
            && tweet.user_timezone.to_lowercase() == self.capital.to_lowercase()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SalesRecord {
    pub week_start: NaiveDate,
    pub country: String,
    pub units: f64,
}

/// One manual rating of one tweet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRecord {
    pub tweet_id: String,
    pub rater_id: String,
    pub tweet_type: RawTweetType,
    pub user_type: RawUserType,
    pub sentiment: RawSentiment,
}

impl LabelRecord {
    pub fn triple(&self) -> RawTriple {
        RawTriple { tweet_type: self.tweet_type, user_type: self.user_type, sentiment: self.sentiment }
    }
}

/// Counts of inputs that fell outside the aggregation range.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AggregateDiagnostics {
    pub in_range: usize,
    pub out_of_range: usize,
}

pub fn parse_tweets<R: Read>(reader: R, format: TweetFormat) -> Result<Vec<TweetRecord>, IngestError> {
    let tweets = match format {
        TweetFormat::JsonLines => parse_tweets_jsonl(reader)?,
        TweetFormat::Csv => parse_tweets_csv(reader)?,
    };
    Ok(tweets)
}

fn check_tweet(
    tweet: TweetRecord,
    line: usize,
    seen: &mut HashSet<String>,
    out: &mut Vec<TweetRecord>,
) -> Result<(), IngestError> {
    if tweet.id.is_empty() {
        return Err(IngestError::Malformed { line, message: "empty id".into() });
    }
    if !seen.insert(tweet.id.clone()) {
        return Err(IngestError::DuplicateId { line, id: tweet.id });
    }
    out.push(tweet);
    Ok(())
}

fn parse_tweets_jsonl<R: Read>(reader: R) -> Result<Vec<TweetRecord>, IngestError> {
    let reader = std::io::BufReader::new(reader);
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(&line)
            .map_err(|e| IngestError::Malformed { line: line_no, message: e.to_string() })?;
        let obj = value.as_object().ok_or_else(|| IngestError::Malformed {
            line: line_no,
            message: "expected a JSON object".into(),
        })?;
        if let Some(field) = TWEET_FIELDS.iter().find(|f| !obj.contains_key(**f)) {
            return Err(IngestError::MissingField { line: line_no, field });
        }
        let tweet: TweetRecord = serde_json::from_value(value)
            .map_err(|e| IngestError::Malformed { line: line_no, message: e.to_string() })?;
        check_tweet(tweet, line_no, &mut seen, &mut out)?;
    }
    Ok(out)
}

fn parse_tweets_csv<R: Read>(reader: R) -> Result<Vec<TweetRecord>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_error(e, 1))?.clone();
    if let Some(field) = TWEET_FIELDS.iter().find(|f| !headers.iter().any(|h| h == **f)) {
        return Err(IngestError::MissingField { line: 1, field });
    }
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, rec) in rdr.records().enumerate() {
        let fallback = i + 2;
        let rec = rec.map_err(|e| csv_error(e, fallback))?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(fallback);
        let tweet: TweetRecord = rec.deserialize(Some(&headers)).map_err(|e| IngestError::Malformed {
            line,
            message: e.to_string(),
        })?;
        check_tweet(tweet, line, &mut seen, &mut out)?;
    }
    Ok(out)
}

fn csv_error(e: csv::Error, fallback_line: usize) -> IngestError {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(fallback_line);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => IngestError::Io(io),
        other => IngestError::Malformed { line, message: format!("{other:?}") },
    }
}

/// Fetches a required CSV column, failing with the header line number.
fn column(headers: &csv::StringRecord, name: &'static str) -> Result<usize, IngestError> {
    headers.iter().position(|h| h == name).ok_or(IngestError::MissingField { line: 1, field: name })
}

pub fn parse_sales<R: Read>(reader: R) -> Result<Vec<SalesRecord>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_error(e, 1))?.clone();
    let (c_week, c_country, c_units) =
        (column(&headers, "week_start")?, column(&headers, "country")?, column(&headers, "units")?);
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let fallback = i + 2;
        let rec = rec.map_err(|e| csv_error(e, fallback))?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(fallback);
        let bad = |message: String| IngestError::Malformed { line, message };
        let week_start = NaiveDate::parse_from_str(&rec[c_week], "%Y-%m-%d")
            .map_err(|e| bad(format!("week_start '{}': {e}", &rec[c_week])))?;
        if week_start.weekday() != Weekday::Mon {
            return Err(bad(format!("week_start {week_start} is not a Monday")));
        }
        let units: f64 = rec[c_units].parse().map_err(|e| bad(format!("units '{}': {e}", &rec[c_units])))?;
        if !units.is_finite() || units < 0.0 {
            return Err(bad(format!("units must be a non-negative number, got {units}")));
        }
        out.push(SalesRecord { week_start, country: rec[c_country].to_string(), units });
    }
    Ok(out)
}

pub fn parse_labels<R: Read>(reader: R) -> Result<Vec<LabelRecord>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_error(e, 1))?.clone();
    let cols = [
        column(&headers, "tweet_id")?,
        column(&headers, "rater_id")?,
        column(&headers, "tweet_type")?,
        column(&headers, "user_type")?,
        column(&headers, "sentiment")?,
    ];
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let fallback = i + 2;
        let rec = rec.map_err(|e| csv_error(e, fallback))?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(fallback);
        let bad = |e: crate::classify::labels::UnknownClass| IngestError::Malformed { line, message: e.to_string() };
        let tweet_id = rec[cols[0]].to_string();
        if tweet_id.is_empty() {
            return Err(IngestError::Malformed { line, message: "empty tweet_id".into() });
        }
        out.push(LabelRecord {
            tweet_id,
            rater_id: rec[cols[1]].to_string(),
            tweet_type: RawTweetType::parse_name(&rec[cols[2]]).map_err(bad)?,
            user_type: RawUserType::parse_name(&rec[cols[3]]).map_err(bad)?,
            sentiment: RawSentiment::parse_name(&rec[cols[4]]).map_err(bad)?,
        });
    }
    Ok(out)
}

pub fn write_tweets_jsonl<W: Write>(mut w: W, tweets: &[TweetRecord]) -> std::io::Result<()> {
    for t in tweets {
        serde_json::to_writer(&mut w, t)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_sales_csv<W: Write>(w: W, records: &[SalesRecord]) -> Result<(), csv::Error> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["week_start", "country", "units"])?;
    for r in records {
        wtr.write_record([r.week_start.to_string(), r.country.clone(), format!("{}", r.units)])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_labels_csv<W: Write>(w: W, labels: &[LabelRecord]) -> Result<(), csv::Error> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["tweet_id", "rater_id", "tweet_type", "user_type", "sentiment"])?;
    for l in labels {
        wtr.write_record([
            l.tweet_id.as_str(),
            l.rater_id.as_str(),
            l.tweet_type.as_str(),
            l.user_type.as_str(),
            l.sentiment.as_str(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Keeps tweets whose language and time zone both match the country.
pub fn filter_country(tweets: &[TweetRecord], spec: &CountrySpec) -> Vec<TweetRecord> {
    tweets.iter().filter(|t| spec.matches(t)).cloned().collect()
}

/// Weekly counts of `timestamps`; weeks without any timestamp hold zero.
pub fn aggregate_weekly<T: Real>(
    timestamps: &[DateTime<Utc>],
    range: &WeekRange,
    label: &str,
) -> (WeeklySeries<T>, AggregateDiagnostics) {
    let mut counts = vec![0usize; range.n_weeks()];
    let mut diag = AggregateDiagnostics::default();
    for ts in timestamps {
        match range.index_of(ts) {
            Some(i) => {
                counts[i] += 1;
                diag.in_range += 1;
            }
            None => diag.out_of_range += 1,
        }
    }
    let series = WeeklySeries {
        start_week: range.first_week(),
        values: counts.into_iter().map(|c| Some(T::from_count(c))).collect(),
        label: label.to_string(),
    };
    (series, diag)
}

/// Weekly sums of sales units; weeks without any record are missing.
pub fn aggregate_sales<T: Real>(
    records: &[SalesRecord],
    range: &WeekRange,
    label: &str,
) -> (WeeklySeries<T>, AggregateDiagnostics) {
    let mut sums: Vec<Option<f64>> = vec![None; range.n_weeks()];
    let mut diag = AggregateDiagnostics::default();
    for r in records {
        match range.index_of_date(r.week_start) {
            Some(i) => {
                *sums[i].get_or_insert(0.0) += r.units;
                diag.in_range += 1;
            }
            None => diag.out_of_range += 1,
        }
    }
    let series = WeeklySeries {
        start_week: range.first_week(),
        values: sums.into_iter().map(|v| v.map(T::lit)).collect(),
        label: label.to_string(),
    };
    (series, diag)
}

/// Divides every value by the largest observed value.
pub fn normalize_series<T: Real>(s: &WeeklySeries<T>) -> Result<WeeklySeries<T>, IngestError> {
    let max = s.max_observed().ok_or(IngestError::AllMissing)?;
    if max.is_nan() || max <= T::zero() {
        return Err(IngestError::NonPositiveMaximum);
    }
    Ok(s.map(|v| v / max))
}

/// Trims both series to the weeks they share.
pub fn align<T: Real>(
    a: &WeeklySeries<T>,
    b: &WeeklySeries<T>,
) -> Result<(WeeklySeries<T>, WeeklySeries<T>), SeriesError> {
    let start = a.start_week.max(b.start_week);
    let end_a = a.week_start(a.len());
    let end_b = b.week_start(b.len());
    let end = end_a.min(end_b);
    if start >= end {
        return Err(SeriesError::NoOverlap);
    }
    let len = ((end - start).num_days() / 7) as usize;
    let off_a = ((start - a.start_week).num_days() / 7) as usize;
    let off_b = ((start - b.start_week).num_days() / 7) as usize;
    Ok((a.slice(off_a, len)?, b.slice(off_b, len)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    const LINE: &str = r#"{"id":"1","text":"hoi!","created_at":"2012-03-05T10:00:00Z","user_name":"Anna","user_screen_name":"anna_k93","followers":120,"friends":80,"statuses_count":900,"retweet_count":2,"is_retweet":false,"user_timezone":"Amsterdam","language":"nl"}"#;

    fn tweet(id: &str, lang: &str, tz: &str) -> TweetRecord {
        let mut t: TweetRecord = serde_json::from_str(LINE).unwrap();
        t.id = id.into();
        t.language = lang.into();
        t.user_timezone = tz.into();
        t
    }

    #[test]
    fn parses_empty_and_single_line() {
        assert!(parse_tweets("".as_bytes(), TweetFormat::JsonLines).unwrap().is_empty());
        let tweets = parse_tweets(LINE.as_bytes(), TweetFormat::JsonLines).unwrap();
        assert_eq!(tweets.len(), 1);
        let t = &tweets[0];
        assert_eq!(t.id, "1");
        assert_eq!(t.text, "hoi!");
        assert_eq!(t.created_at, Utc.with_ymd_and_hms(2012, 3, 5, 10, 0, 0).unwrap());
        assert_eq!((t.followers, t.friends, t.statuses_count, t.retweet_count), (120, 80, 900, 2));
        assert!(!t.is_retweet);
        assert_eq!(t.user_screen_name, "anna_k93");
    }

    #[test]
    fn missing_field_names_line() {
        let line = LINE.replace(r#""followers":120,"#, "");
        let err = parse_tweets(line.as_bytes(), TweetFormat::JsonLines).unwrap_err();
        assert_eq!(err.to_string(), "line 1: missing field followers");
    }

    #[test]
    fn malformed_and_duplicate_lines_are_errors() {
        let input = format!("{LINE}\n{{not json\n");
        let err = parse_tweets(input.as_bytes(), TweetFormat::JsonLines).unwrap_err();
        assert!(matches!(err, IngestError::Malformed { line: 2, .. }), "{err}");
        let input = format!("{LINE}\n\n{LINE}\n");
        let err = parse_tweets(input.as_bytes(), TweetFormat::JsonLines).unwrap_err();
        assert!(matches!(err, IngestError::DuplicateId { line: 3, .. }), "{err}");
    }

    #[test]
    fn csv_tweets_match_jsonl() {
        let t = tweet("7", "nl", "Amsterdam");
        let mut wtr = csv::Writer::from_writer(vec![]);
        wtr.serialize(&t).unwrap();
        let bytes = wtr.into_inner().unwrap();
        let parsed = parse_tweets(bytes.as_slice(), TweetFormat::Csv).unwrap();
        assert_eq!(parsed, vec![t]);

        let err = parse_tweets("id,text\n1,x\n".as_bytes(), TweetFormat::Csv).unwrap_err();
        assert_eq!(err.to_string(), "line 1: missing field created_at");
    }

    #[test]
    fn country_filter_examples() {
        let nl = CountrySpec::new("Netherlands", "nl", "Amsterdam");
        let de = CountrySpec::new("Germany", "de", "Berlin");
        assert_eq!(filter_country(&[tweet("a", "nl", "Amsterdam")], &nl).len(), 1);
        assert_eq!(filter_country(&[tweet("a", "NL", "amsterdam")], &nl).len(), 1);
        assert!(filter_country(&[tweet("b", "de", "Vienna")], &de).is_empty());
        assert!(filter_country(&[], &de).is_empty());
    }

    #[test]
    fn weekly_aggregation_examples() {
        let range = WeekRange::from_dates(d(2012, 1, 2), d(2012, 1, 29)).unwrap();
        let wed = Utc.with_ymd_and_hms(2012, 1, 11, 12, 0, 0).unwrap();
        let (s, diag) = aggregate_weekly::<f64>(&[wed, wed, wed], &range, "t");
        assert_eq!(s.values, vec![Some(0.0), Some(3.0), Some(0.0), Some(0.0)]);
        assert_eq!(diag, AggregateDiagnostics { in_range: 3, out_of_range: 0 });

        let sun = Utc.with_ymd_and_hms(2012, 1, 8, 23, 59, 0).unwrap();
        let mon = Utc.with_ymd_and_hms(2012, 1, 9, 0, 0, 0).unwrap();
        let (s, _) = aggregate_weekly::<f64>(&[sun, mon], &range, "t");
        assert_eq!(&s.values[..2], &[Some(1.0), Some(1.0)]);

        let (s, _) = aggregate_weekly::<f64>(&[], &range, "t");
        assert!(s.values.iter().all(|v| *v == Some(0.0)));

        let late = Utc.with_ymd_and_hms(2012, 2, 1, 0, 0, 0).unwrap();
        let (_, diag) = aggregate_weekly::<f64>(&[late, wed], &range, "t");
        assert_eq!(diag, AggregateDiagnostics { in_range: 1, out_of_range: 1 });
    }

    #[test]
    fn sales_aggregation_examples() {
        let range = WeekRange::from_dates(d(2012, 1, 2), d(2012, 1, 15)).unwrap();
        let rec = |w, u| SalesRecord { week_start: w, country: "NL".into(), units: u };
        let (s, _) = aggregate_sales::<f64>(&[rec(d(2012, 1, 2), 2.0), rec(d(2012, 1, 2), 3.0)], &range, "s");
        assert_eq!(s.values, vec![Some(5.0), None]);
        let (s, diag) = aggregate_sales::<f64>(&[rec(d(2012, 1, 9), 4.0), rec(d(2013, 1, 7), 1.0)], &range, "s");
        assert_eq!(s.values, vec![None, Some(4.0)]);
        assert_eq!(diag.out_of_range, 1);
    }

    #[test]
    fn sales_parse_rejects_non_monday() {
        let ok = parse_sales("week_start,country,units\n2012-01-02,Netherlands,3.5\n".as_bytes()).unwrap();
        assert_eq!(ok[0].units, 3.5);
        let err = parse_sales("week_start,country,units\n2012-01-03,Netherlands,3.5\n".as_bytes()).unwrap_err();
        assert!(err.to_string().starts_with("line 2:"), "{err}");
        let err = parse_sales("week_start,country,units\n2012-01-02,Netherlands,-1\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("non-negative"));
    }

    #[test]
    fn labels_parse_and_reject_unknown_classes() {
        let ok = parse_labels(
            "tweet_id,rater_id,tweet_type,user_type,sentiment\n1,r1,customer_experience,person,positive\n"
                .as_bytes(),
        )
        .unwrap();
        assert_eq!(ok[0].tweet_type, RawTweetType::CustomerExperience);
        let err = parse_labels(
            "tweet_id,rater_id,tweet_type,user_type,sentiment\n1,r1,gossip,person,positive\n".as_bytes(),
        )
        .unwrap_err();
        assert_eq!(err.to_string(), "line 2: unknown tweet_type class 'gossip'");
    }

    #[test]
    fn normalization_examples() {
        let s = WeeklySeries::from_values(d(2012, 1, 2), &[2.0, 4.0, 8.0], "s").unwrap();
        assert_eq!(normalize_series(&s).unwrap().observed(), vec![0.25, 0.5, 1.0]);
        let s = WeeklySeries::from_values(d(2012, 1, 2), &[5.0], "s").unwrap();
        assert_eq!(normalize_series(&s).unwrap().observed(), vec![1.0]);
        let s = WeeklySeries::from_values(d(2012, 1, 2), &[0.0, 0.0], "s").unwrap();
        assert_eq!(normalize_series(&s).unwrap_err().to_string(), "non-positive maximum");
        let s = WeeklySeries::<f64>::new(d(2012, 1, 2), vec![None, None], "s").unwrap();
        assert!(matches!(normalize_series(&s), Err(IngestError::AllMissing)));
    }

    #[test]
    fn alignment_examples() {
        let week = |k: i64| d(2012, 1, 2) + chrono::Duration::weeks(k - 1);
        let a = WeeklySeries::from_values(week(1), &[1.0; 10], "a").unwrap();
        let b = WeeklySeries::from_values(week(5), &[2.0; 11], "b").unwrap();
        let (a2, b2) = align(&a, &b).unwrap();
        assert_eq!((a2.start_week, a2.len()), (week(5), 6));
        assert_eq!((b2.start_week, b2.len()), (week(5), 6));

        let (a3, a4) = align(&a, &a).unwrap();
        assert_eq!(a3, a);
        assert_eq!(a4, a);

        let c = WeeklySeries::from_values(week(20), &[1.0; 3], "c").unwrap();
        assert_eq!(align(&a, &c).unwrap_err(), SeriesError::NoOverlap);
    }
}
