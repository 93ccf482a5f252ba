use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::Serialize;
use signallab::classify::agreement::{consensus_label, dimension_votes, group_ratings};
use signallab::classify::features::DEMO_LEXICON;
use signallab::classify::weekly::classified_weekly_followers;
use signallab::classify::{
    agreement_for_labels, classified_weekly_counts, extract_features, standard_filters, train_tree, DecisionTree,
    Dimension, NameLexicon, RevisedTriple, Scheme, TreeParams, TripleFilter, DEFAULT_EMOTICONS,
};
use signallab::events::{detect_peak_weeks, reach_stats, robustness_sweep, run_event_study, EventStudyConfig};
use signallab::ingest::{
    aggregate_sales, aggregate_weekly, filter_country, normalize_series, parse_labels, parse_sales, parse_tweets,
    write_labels_csv, write_sales_csv, write_tweets_jsonl, CountrySpec, LabelRecord, TweetFormat, TweetRecord,
};
use signallab::series::monday_of;
use signallab::synth::{dataset_labels, generate_dataset, SynthConfig};
use signallab::tsa::adf::AdfResult;
use signallab::tsa::granger::{first_significant, write_sweep_csv};
use signallab::tsa::{adf_test, correlation_table, difference, granger_sweep, SignalTransform};
use signallab::{Series, WeekRange};

use crate::io::{open, read_to_string, read_weekly_csv, write_weekly_csv, OutDir, RunManifest};
use crate::{Analysis, AnalyzeArgs, ClassifyArgs, ClassifyMode, CliError, IngestArgs, SynthArgs};

const LEXICON_ENV: &str = "SIGNALLAB_LEXICON";
const SWEEP_QUANTILES: [f64; 4] = [0.80, 0.85, 0.90, 0.95];
const SWEEP_EVENT_WINDOWS: [usize; 6] = [0, 1, 2, 3, 4, 5];
const SWEEP_ESTIMATION_WINDOWS: [usize; 5] = [4, 6, 8, 10, 12];

fn csv_err(e: csv::Error) -> CliError {
    CliError::Input(e.to_string())
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Input(format!("{}: {e}", path.display()))
}

fn tweet_format(path: &Path) -> TweetFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("csv") => TweetFormat::Csv,
        _ => TweetFormat::JsonLines,
    }
}

fn load_tweets(path: &Path) -> Result<Vec<TweetRecord>, CliError> {
    parse_tweets(open(path)?, tweet_format(path)).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_labels(path: &Path) -> Result<Vec<LabelRecord>, CliError> {
    parse_labels(open(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn required<'a>(p: &'a Option<std::path::PathBuf>, what: &str) -> Result<&'a Path, CliError> {
    p.as_deref().ok_or_else(|| CliError::Input(format!("missing --{what}")))
}

pub fn synth(a: &SynthArgs) -> Result<(), CliError> {
    let mut cfg: SynthConfig = match &a.config {
        Some(p) => serde_json::from_str(&read_to_string(p)?)
            .map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?,
        None => SynthConfig::default(),
    };
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    let data = generate_dataset(&cfg).map_err(|e| CliError::Input(e.to_string()))?;
    let labels = dataset_labels(&cfg, &data.truth).map_err(|e| CliError::Input(e.to_string()))?;

    let mut m = RunManifest::new("synth");
    if let Some(p) = &a.config {
        m.input("config", p);
    }
    m.seed = Some(cfg.seed);
    m.config("synth", &cfg);
    let mut out = OutDir::create(&a.out, m)?;
    let p = out.path("tweets.jsonl");
    write_tweets_jsonl(std::io::BufWriter::new(std::fs::File::create(&p).map_err(io_err(&p))?), &data.tweets)
        .map_err(io_err(&p))?;
    write_sales_csv(out.writer("sales.csv")?, &data.sales).map_err(csv_err)?;
    write_labels_csv(out.writer("labels.csv")?, &labels).map_err(csv_err)?;
    out.report("ground_truth.json", &data.truth)?;
    out.json("config.json", &cfg)?;
    out.finish()
}

fn country_spec(a: &IngestArgs) -> Result<CountrySpec, CliError> {
    let c = &a.country;
    let mut spec = match CountrySpec::preset(&c.country) {
        Some(s) => s,
        None => match (&c.lang, &c.capital) {
            (Some(l), Some(cap)) => CountrySpec::new(c.country.clone(), l.clone(), cap.clone()),
            _ => {
                return Err(CliError::Input(format!(
                    "unknown country '{}'; give --lang and --capital",
                    c.country
                )))
            }
        },
    };
    if let Some(l) = &c.lang {
        spec.language = l.clone();
    }
    if let Some(cap) = &c.capital {
        spec.capital = cap.clone();
    }
    Ok(spec)
}

#[derive(Serialize)]
struct IngestReport {
    country: String,
    first_week: String,
    n_weeks: usize,
    tweets_in_range: usize,
    tweets_out_of_range: usize,
    tweets_other_countries: usize,
    sales_records_in_range: usize,
    sales_records_out_of_range: usize,
    sales_weeks_missing: usize,
    mean_weekly_tweets: f64,
    low_volume_warning: bool,
}

pub fn ingest(a: &IngestArgs) -> Result<(), CliError> {
    let spec = country_spec(a)?;
    let tweets = load_tweets(&a.tweets)?;
    let sales = parse_sales(open(&a.sales)?).map_err(|e| CliError::Input(format!("{}: {e}", a.sales.display())))?;
    let local = filter_country(&tweets, &spec);
    if local.is_empty() {
        return Err(CliError::Input(format!("no tweets match {} ({}, {})", spec.name, spec.language, spec.capital)));
    }
    let sales: Vec<_> = sales.into_iter().filter(|r| r.country.eq_ignore_ascii_case(&spec.name)).collect();
    if sales.is_empty() {
        return Err(CliError::Input(format!("{}: no sales records for {}", a.sales.display(), spec.name)));
    }

    let range = match (a.from, a.to) {
        (Some(f), Some(t)) => WeekRange::from_dates(f, t)?,
        _ => {
            let t_lo = local.iter().map(|t| t.created_at.date_naive()).min().expect("non-empty");
            let t_hi = local.iter().map(|t| t.created_at.date_naive()).max().expect("non-empty");
            let s_lo = sales.iter().map(|r| r.week_start).min().expect("non-empty");
            let s_hi = sales.iter().map(|r| r.week_start).max().expect("non-empty");
            let lo = monday_of(t_lo).max(s_lo).max(a.from.unwrap_or(s_lo));
            let hi = t_hi.min(s_hi + chrono::Duration::days(6)).min(a.to.unwrap_or(s_hi + chrono::Duration::days(6)));
            if lo > hi {
                return Err(CliError::Alignment("no overlap between tweet and sales dates".into()));
            }
            WeekRange::from_dates(lo, hi)?
        }
    };
    let stamps: Vec<_> = local.iter().map(|t| t.created_at).collect();
    let (tweet_series, tdiag) = aggregate_weekly::<f64>(&stamps, &range, "tweets");
    let (sales_series, sdiag) = aggregate_sales::<f64>(&sales, &range, "sales");
    if sdiag.in_range == 0 || tdiag.in_range == 0 {
        return Err(CliError::Alignment("no overlap between tweet and sales dates".into()));
    }
    let tweets_norm = normalize_series(&tweet_series)?.with_label("tweets_normalized");
    let sales_norm = normalize_series(&sales_series)?.with_label("sales_normalized");
    let mean_weekly = tdiag.in_range as f64 / range.n_weeks() as f64;
    let warn = mean_weekly < a.min_weekly_tweets;
    if warn {
        eprintln!(
            "warning: {mean_weekly:.1} tweets per week is below {}; weekly statistics may be unreliable",
            a.min_weekly_tweets
        );
    }

    let mut m = RunManifest::new("ingest");
    m.input("tweets", &a.tweets).input("sales", &a.sales);
    m.config("country", &spec.name).config("language", &spec.language).config("capital", &spec.capital);
    m.config("from", range.first_week().to_string()).config("n_weeks", range.n_weeks());
    m.config("min_weekly_tweets", a.min_weekly_tweets);
    let mut out = OutDir::create(&a.out, m)?;
    {
        let mut w = out.writer("summary.csv")?;
        let mut wtr = csv::Writer::from_writer(&mut w);
        wtr.write_record(["country", "tweets"]).map_err(csv_err)?;
        wtr.write_record([spec.name.clone(), tdiag.in_range.to_string()]).map_err(csv_err)?;
        wtr.flush().map_err(io_err(&a.out))?;
    }
    write_weekly_csv(out.writer("weekly.csv")?, &[&tweet_series, &sales_series, &tweets_norm, &sales_norm])?;
    let kept: Vec<TweetRecord> = local.iter().filter(|t| range.index_of(&t.created_at).is_some()).cloned().collect();
    let p = out.path("tweets_filtered.jsonl");
    write_tweets_jsonl(std::io::BufWriter::new(std::fs::File::create(&p).map_err(io_err(&p))?), &kept)
        .map_err(io_err(&p))?;
    out.report(
        "ingest_report.json",
        &IngestReport {
            country: spec.name.clone(),
            first_week: range.first_week().to_string(),
            n_weeks: range.n_weeks(),
            tweets_in_range: tdiag.in_range,
            tweets_out_of_range: tdiag.out_of_range,
            tweets_other_countries: tweets.len() - local.len(),
            sales_records_in_range: sdiag.in_range,
            sales_records_out_of_range: sdiag.out_of_range,
            sales_weeks_missing: sales_series.n_missing(),
            mean_weekly_tweets: mean_weekly,
            low_volume_warning: warn,
        },
    )?;
    out.finish()
}

fn load_lexicon(a: &ClassifyArgs, m: &mut RunManifest) -> Result<NameLexicon, CliError> {
    let path = a.lexicon.clone().or_else(|| std::env::var_os(LEXICON_ENV).map(Into::into));
    match path {
        Some(p) => {
            m.input("lexicon", &p);
            Ok(NameLexicon::parse(&read_to_string(&p)?))
        }
        None => {
            m.config("lexicon", "bundled demo list");
            Ok(NameLexicon::parse(DEMO_LEXICON))
        }
    }
}

#[derive(Serialize)]
struct TrainSummary {
    reports: Vec<signallab::classify::TrainReport>,
    /// Rated tweets without a majority class, per dimension.
    no_majority: BTreeMap<String, usize>,
    /// Rated tweet ids absent from the tweet file.
    unmatched_labels: usize,
}

pub fn classify(a: &ClassifyArgs) -> Result<(), CliError> {
    match a.mode {
        ClassifyMode::Train => classify_train(a),
        ClassifyMode::Predict => classify_predict(a),
        ClassifyMode::Agreement => classify_agreement(a),
    }
}

fn classify_train(a: &ClassifyArgs) -> Result<(), CliError> {
    let tweets_path = required(&a.tweets, "tweets")?;
    let labels_path = required(&a.labels, "labels")?;
    let mut m = RunManifest::new("classify train");
    m.input("tweets", tweets_path).input("labels", labels_path);
    let lexicon = load_lexicon(a, &mut m)?;
    let tweets = load_tweets(tweets_path)?;
    let labels = load_labels(labels_path)?;
    if labels.is_empty() {
        return Err(CliError::Input(format!("{}: no labels", labels_path.display())));
    }
    let by_id: HashMap<&str, &TweetRecord> = tweets.iter().map(|t| (t.id.as_str(), t)).collect();

    let mut examples: BTreeMap<Dimension, Vec<_>> = BTreeMap::new();
    let mut no_majority: BTreeMap<String, usize> = BTreeMap::new();
    let mut unmatched = 0;
    for (id, group) in group_ratings(&labels) {
        let Some(tweet) = by_id.get(id.as_str()) else {
            unmatched += 1;
            continue;
        };
        let features = extract_features(tweet, &lexicon, &DEFAULT_EMOTICONS);
        for dim in Dimension::ALL {
            let votes = dimension_votes(&group, dim, Scheme::Revised);
            let consensus = consensus_label(&votes)
                .map_err(|e| CliError::Input(format!("{}: tweet {id}: {e}", labels_path.display())))?;
            match consensus {
                Some(class) => examples.entry(dim).or_default().push((features, class.to_string())),
                None => *no_majority.entry(dim.as_str().to_string()).or_default() += 1,
            }
        }
    }

    let params = TreeParams { max_depth: a.max_depth, min_leaf: a.min_leaf, split_seed: a.seed };
    m.seed = Some(a.seed);
    m.config("max_depth", a.max_depth).config("min_leaf", a.min_leaf);
    let mut out = OutDir::create(&a.out, m)?;
    let mut reports = Vec::new();
    for dim in Dimension::ALL {
        let ex = examples.remove(&dim).unwrap_or_default();
        let (tree, report) =
            train_tree(&ex, dim, &params).map_err(|e| CliError::Input(format!("{}: {e}", dim.as_str())))?;
        let p = out.path(&format!("model_{}.json", dim.as_str()));
        std::fs::write(&p, tree.to_json() + "\n").map_err(io_err(&p))?;
        reports.push(report);
    }
    out.report("train_report.json", &TrainSummary { reports, no_majority, unmatched_labels: unmatched })?;
    out.finish()
}

fn classify_predict(a: &ClassifyArgs) -> Result<(), CliError> {
    let tweets_path = required(&a.tweets, "tweets")?;
    let models = a.models.as_deref().unwrap_or(&a.out);
    let mut m = RunManifest::new("classify predict");
    m.input("tweets", tweets_path).input("models", models);
    let lexicon = load_lexicon(a, &mut m)?;
    let mut trees = Vec::new();
    for dim in Dimension::ALL {
        let p = models.join(format!("model_{}.json", dim.as_str()));
        let tree = DecisionTree::from_json(&read_to_string(&p)?)
            .map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
        if tree.target != dim {
            return Err(CliError::Input(format!("{}: model targets {}", p.display(), tree.target.as_str())));
        }
        trees.push(tree);
    }
    let tweets = load_tweets(tweets_path)?;
    if tweets.is_empty() {
        return Err(CliError::Input(format!("{}: no tweets", tweets_path.display())));
    }

    let mut classified = Vec::with_capacity(tweets.len());
    let mut rows = Vec::with_capacity(tweets.len());
    for t in &tweets {
        let f = extract_features(t, &lexicon, &DEFAULT_EMOTICONS);
        let preds: Vec<(String, f64)> = trees.iter().map(|tree| tree.predict(&f)).collect();
        let triple = RevisedTriple::from_names(&preds[0].0, &preds[1].0, &preds[2].0)
            .map_err(|e| CliError::Input(format!("model predicts an unknown class: {e}")))?;
        let mut row = vec![t.id.clone()];
        row.extend(preds.iter().map(|(c, _)| c.clone()));
        row.extend(preds.iter().map(|(_, p)| format!("{p:.6}")));
        rows.push(row);
        classified.push((t.clone(), triple));
    }

    let range = match (a.from, a.to) {
        (Some(f), Some(t)) => WeekRange::from_dates(f, t)?,
        _ => {
            let lo = tweets.iter().map(|t| t.created_at.date_naive()).min().expect("non-empty");
            let hi = tweets.iter().map(|t| t.created_at.date_naive()).max().expect("non-empty");
            WeekRange::from_dates(a.from.unwrap_or(lo), a.to.unwrap_or(hi))?
        }
    };
    let filters = standard_filters();
    let counts: Vec<Series> = filters.iter().map(|f| classified_weekly_counts(&classified, f, &range)).collect();
    let followers: Vec<Series> = filters
        .iter()
        .map(|f| classified_weekly_followers::<f64>(&classified, f, &range).with_label(f.to_string()))
        .collect();

    m.config("from", range.first_week().to_string()).config("n_weeks", range.n_weeks());
    let mut out = OutDir::create(&a.out, m)?;
    {
        let mut w = out.writer("predictions.csv")?;
        let mut wtr = csv::Writer::from_writer(&mut w);
        wtr.write_record([
            "tweet_id",
            "tweet_type",
            "user_type",
            "sentiment",
            "tweet_type_confidence",
            "user_type_confidence",
            "sentiment_confidence",
        ])
        .map_err(csv_err)?;
        for r in &rows {
            wtr.write_record(r).map_err(csv_err)?;
        }
        wtr.flush().map_err(io_err(&a.out))?;
    }
    write_weekly_csv(out.writer("classified_weekly.csv")?, &counts.iter().collect::<Vec<_>>())?;
    write_weekly_csv(out.writer("followers_weekly.csv")?, &followers.iter().collect::<Vec<_>>())?;
    out.finish()
}

fn classify_agreement(a: &ClassifyArgs) -> Result<(), CliError> {
    let labels_path = required(&a.labels, "labels")?;
    let labels = load_labels(labels_path)?;
    if labels.is_empty() {
        return Err(CliError::Input(format!("{}: no labels", labels_path.display())));
    }
    let mut m = RunManifest::new("classify agreement");
    m.input("labels", labels_path);
    let mut reports = BTreeMap::new();
    for dim in Dimension::ALL {
        let mut per_scheme = BTreeMap::new();
        for (name, scheme) in [("raw", Scheme::Raw), ("revised", Scheme::Revised)] {
            let r = agreement_for_labels(&labels, dim, scheme)
                .map_err(|e| CliError::Input(format!("{}: {e}", labels_path.display())))?;
            per_scheme.insert(name, r);
        }
        reports.insert(dim.as_str(), per_scheme);
    }
    let mut out = OutDir::create(&a.out, m)?;
    {
        let mut w = out.writer("agreement.csv")?;
        let mut wtr = csv::Writer::from_writer(&mut w);
        wtr.write_record(["dimension", "scheme", "class", "hits", "ratings", "accuracy"]).map_err(csv_err)?;
        for (dim, schemes) in &reports {
            for (scheme, r) in schemes {
                for (class, c) in &r.per_class {
                    wtr.write_record([
                        dim.to_string(),
                        scheme.to_string(),
                        class.clone(),
                        c.hits.to_string(),
                        c.ratings.to_string(),
                        format!("{:.6}", c.accuracy),
                    ])
                    .map_err(csv_err)?;
                }
                wtr.write_record([
                    dim.to_string(),
                    scheme.to_string(),
                    "overall".into(),
                    r.hits.to_string(),
                    r.n_ratings.to_string(),
                    format!("{:.6}", r.overall_accuracy),
                ])
                .map_err(csv_err)?;
            }
        }
        wtr.flush().map_err(io_err(&a.out))?;
    }
    out.report("agreement.json", &reports)?;
    out.finish()
}

fn parse_lags(s: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Input(format!("invalid --lags '{s}', expected e.g. 1..8 or 1,2,3"));
    let s = s.trim();
    if let Some((lo, hi)) = s.split_once("..").or_else(|| s.split_once('-')) {
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if lo == 0 || lo > hi {
            return Err(bad());
        }
        return Ok((lo..=hi).collect());
    }
    let lags: Vec<usize> = s.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
    if lags.contains(&0) {
        return Err(bad());
    }
    Ok(lags)
}

struct SeriesSet {
    sales: Series,
    /// Every tweet series, aligned with `sales`.
    rows: Vec<Series>,
    /// Index into `rows` of the analysed series.
    selected: usize,
    /// Index into `rows` of the all-tweets series.
    total: usize,
    classified: bool,
}

fn load_series(a: &AnalyzeArgs, m: &mut RunManifest) -> Result<SeriesSet, CliError> {
    let weekly_path = a.series.join("weekly.csv");
    m.input("weekly", &weekly_path);
    let weekly = read_weekly_csv(&weekly_path)?;
    let column = |set: &[Series], name: &str, path: &Path| {
        set.iter()
            .find(|s| s.label == name)
            .cloned()
            .ok_or_else(|| CliError::Input(format!("{}: no column '{name}'", path.display())))
    };
    let sales = column(&weekly, "sales", &weekly_path)?;
    let classified_path = a.series.join("classified_weekly.csv");
    let (raw_rows, classified) = if classified_path.exists() {
        m.input("classified", &classified_path);
        (read_weekly_csv(&classified_path)?, true)
    } else {
        (vec![column(&weekly, "tweets", &weekly_path)?], false)
    };
    let wanted = match &a.filter {
        Some(f) if f == "tweets" => "tweets".to_string(),
        Some(f) => f.parse::<TripleFilter>().map_err(|e| CliError::Input(e.to_string()))?.to_string(),
        None if classified => TripleFilter::positive_personal().to_string(),
        None => "tweets".to_string(),
    };
    let total_name = if classified { TripleFilter::ALL.to_string() } else { "tweets".to_string() };
    let selected = raw_rows
        .iter()
        .position(|s| s.label == wanted)
        .ok_or_else(|| CliError::Input(format!("no tweet series '{wanted}' in {}", a.series.display())))?;
    let total = raw_rows
        .iter()
        .position(|s| s.label == total_name)
        .ok_or_else(|| CliError::Input(format!("no tweet series '{total_name}' in {}", a.series.display())))?;
    let mut rows = Vec::with_capacity(raw_rows.len());
    let mut aligned_sales = None;
    for r in &raw_rows {
        let (t, s) = signallab::ingest::align(r, &sales)?;
        rows.push(t);
        aligned_sales.get_or_insert(s);
    }
    Ok(SeriesSet { sales: aligned_sales.expect("at least one row"), rows, selected, total, classified })
}

pub fn analyze(a: &AnalyzeArgs) -> Result<(), CliError> {
    let name = match a.analysis {
        Analysis::Correlate => "correlate",
        Analysis::Adf => "adf",
        Analysis::Granger => "granger",
        Analysis::Eventstudy => "eventstudy",
    };
    let mut m = RunManifest::new(&format!("analyze {name}"));
    let set = load_series(a, &mut m)?;
    m.config("series", &set.rows[set.selected].label);
    match a.analysis {
        Analysis::Correlate => correlate(a, m, &set),
        Analysis::Adf => adf(a, m, &set),
        Analysis::Granger => granger(a, m, &set),
        Analysis::Eventstudy => eventstudy(a, m, &set),
    }
}

fn correlate(a: &AnalyzeArgs, mut m: RunManifest, set: &SeriesSet) -> Result<(), CliError> {
    if a.max_lag < 0 {
        return Err(CliError::Input("--max-lag must be non-negative".into()));
    }
    m.config("max_lag", a.max_lag);
    let table = correlation_table(&set.rows, &set.sales, a.max_lag)?;
    let mut out = OutDir::create(&a.out, m)?;
    table.write_csv(out.writer("correlations.csv")?).map_err(csv_err)?;
    table.write_p_values_csv(out.writer("correlation_p_values.csv")?).map_err(csv_err)?;
    out.report("correlations.json", &table)?;
    out.finish()
}

#[derive(Serialize)]
struct AdfRow {
    series: String,
    result: Result<AdfResult<f64>, String>,
}

fn adf(a: &AnalyzeArgs, mut m: RunManifest, set: &SeriesSet) -> Result<(), CliError> {
    m.config("adf_lags", a.adf_lags).config("difference", a.difference);
    let mut inputs = vec![set.sales.clone(), set.rows[set.selected].clone()];
    if a.difference {
        let diffs: Vec<Series> = inputs.iter().map(difference).collect::<Result<_, _>>()?;
        inputs.extend(diffs);
    }
    let rows: Vec<AdfRow> = inputs
        .iter()
        .map(|s| AdfRow { series: s.label.clone(), result: adf_test(s, a.adf_lags).map_err(|e| e.to_string()) })
        .collect();
    let mut out = OutDir::create(&a.out, m)?;
    {
        let mut w = out.writer("adf.csv")?;
        let mut wtr = csv::Writer::from_writer(&mut w);
        wtr.write_record([
            "series",
            "statistic",
            "lag_order",
            "n_obs",
            "reject_1pct",
            "reject_5pct",
            "reject_10pct",
            "coverage",
            "flag",
        ])
        .map_err(csv_err)?;
        for r in &rows {
            let rec = match &r.result {
                Ok(x) => [
                    r.series.clone(),
                    format!("{:.6}", x.statistic),
                    x.lag_order.to_string(),
                    x.n_obs.to_string(),
                    x.reject_1pct.to_string(),
                    x.reject_5pct.to_string(),
                    x.reject_10pct.to_string(),
                    format!("{:.6}", x.coverage),
                    if x.short_run_warning { "short_run".into() } else { String::new() },
                ],
                Err(e) => {
                    let mut v: [String; 9] = Default::default();
                    v[0] = r.series.clone();
                    for s in &mut v[1..8] {
                        *s = "NA".into();
                    }
                    v[8] = format!("error: {e}");
                    v
                }
            };
            wtr.write_record(&rec).map_err(csv_err)?;
        }
        wtr.flush().map_err(io_err(&a.out))?;
    }
    out.report("adf.json", &serde_json::json!({ "tests": rows }))?;
    out.finish()?;
    match rows.iter().find_map(|r| r.result.as_ref().err()) {
        Some(e) => Err(CliError::Degenerate(e.clone())),
        None => Ok(()),
    }
}

fn granger(a: &AnalyzeArgs, mut m: RunManifest, set: &SeriesSet) -> Result<(), CliError> {
    let ks = parse_lags(&a.lags)?;
    m.config("lags", &ks).config("fraction", a.fraction).config("difference", a.difference).config("alpha", a.alpha);
    let x = &set.rows[set.selected];
    let transform =
        if a.fraction { SignalTransform::Fraction(&set.rows[set.total]) } else { SignalTransform::Count };
    let entries = granger_sweep(x, &set.sales, ks, transform, a.difference)?;
    let mut out = OutDir::create(&a.out, m)?;
    write_sweep_csv(&entries, a.alpha, out.writer("granger.csv")?).map_err(csv_err)?;
    out.report(
        "granger.json",
        &serde_json::json!({
            "series": x.label,
            "alpha": a.alpha,
            "first_significant_k": first_significant(&entries, a.alpha),
            "entries": entries,
        }),
    )?;
    out.finish()?;
    if let Some(Err(msg)) = entries.first().map(|e| &e.result) {
        if entries.iter().all(|e| e.result.is_err()) {
            return Err(CliError::Degenerate(msg.clone()));
        }
    }
    Ok(())
}

fn read_predictions(path: &Path) -> Result<HashMap<String, RevisedTriple>, CliError> {
    let at = |line: usize, msg: String| CliError::Input(format!("{}: line {line}: {msg}", path.display()));
    let mut rdr = csv::Reader::from_reader(open(path)?);
    let mut out = HashMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| at(i + 2, e.to_string()))?;
        if rec.len() < 4 {
            return Err(at(i + 2, "expected tweet_id,tweet_type,user_type,sentiment".into()));
        }
        let t = RevisedTriple::from_names(&rec[1], &rec[2], &rec[3]).map_err(|e| at(i + 2, e.to_string()))?;
        out.insert(rec[0].to_string(), t);
    }
    Ok(out)
}

fn eventstudy(a: &AnalyzeArgs, mut m: RunManifest, set: &SeriesSet) -> Result<(), CliError> {
    let cfg = EventStudyConfig {
        quantile: a.q,
        event_window: a.window,
        estimation_window: a.est_window,
        merge_adjacent: !a.no_merge,
        one_sided: !a.two_sided,
    };
    cfg.validate()?;
    m.config("event_study", cfg).config("alpha", a.alpha).config("sweep", a.sweep);
    let tweets = &set.rows[set.selected];
    let mut out = OutDir::create(&a.out, m)?;

    if a.sweep {
        let grid = robustness_sweep(
            tweets,
            &set.sales,
            &SWEEP_QUANTILES,
            &SWEEP_EVENT_WINDOWS,
            &SWEEP_ESTIMATION_WINDOWS,
            &cfg,
            a.alpha,
        )?;
        grid.write_csv(out.writer("event_sweep.csv")?).map_err(csv_err)?;
        out.report(
            "event_sweep.json",
            &serde_json::json!({ "alpha": grid.alpha, "overall": grid.overall, "per_quantile": grid.per_quantile }),
        )?;
    }

    if let Some(tweets_path) = &a.tweets {
        let pred_path = a.series.join("predictions.csv");
        if !set.classified || !pred_path.exists() {
            return Err(CliError::Input(format!("reach needs {}", pred_path.display())));
        }
        out.manifest.input("tweets", tweets_path).input("predictions", &pred_path);
        let preds = read_predictions(&pred_path)?;
        let filter: TripleFilter = tweets.label.parse().map_err(|e: signallab::classify::ClassifyError| {
            CliError::Input(e.to_string())
        })?;
        let matching: Vec<TweetRecord> = load_tweets(tweets_path)?
            .into_iter()
            .filter(|t| preds.get(&t.id).is_some_and(|p| filter.matches(p)))
            .collect();
        let peaks: Vec<usize> = detect_peak_weeks(tweets, cfg.quantile, false)?.iter().map(|e| e.week).collect();
        let reach = reach_stats(&matching, &set.sales.range(), &peaks)?;
        out.report("reach.json", &reach)?;
    }

    let result = run_event_study(tweets, &set.sales, &cfg);
    match result {
        Ok(r) => {
            out.report("event_study.json", &r.to_report(&set.sales))?;
            out.finish()
        }
        Err(e) => {
            out.finish()?;
            Err(e.into())
        }
    }
}
