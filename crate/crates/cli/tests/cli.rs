use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_signallab")).args(args).current_dir(dir).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn ok(dir: &Path, args: &[&str]) {
    let out = run(dir, args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
}

fn small_synth(dir: &Path, seed: &str) {
    fs::write(dir.join("cfg.json"), r#"{"n_weeks": 30}"#).unwrap();
    ok(dir, &["synth", "--config", "cfg.json", "--seed", seed, "--out", "synth"]);
}

fn weekly_csv(dir: &Path, tweets: &[f64], sales: &[f64]) {
    fs::create_dir_all(dir.join("series")).unwrap();
    let mut text = String::from("week_start,tweets,sales\n");
    let start = chrono::NaiveDate::from_ymd_opt(2012, 1, 2).unwrap();
    for (i, (t, s)) in tweets.iter().zip(sales).enumerate() {
        let week = start + chrono::Duration::weeks(i as i64);
        text.push_str(&format!("{week},{t},{s}\n"));
    }
    fs::write(dir.join("series/weekly.csv"), text).unwrap();
}

#[test]
fn unreadable_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["ingest", "--tweets", "missing.jsonl", "--sales", "missing.csv", "--out", "o"]);
    assert_eq!(code(&out), 2);
    assert!(!out.stderr.is_empty());
}

#[test]
fn unknown_subcommand_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(dir.path(), &["frobnicate"])), 2);
}

#[test]
fn too_few_synth_weeks_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("cfg.json"), r#"{"n_weeks": 5}"#).unwrap();
    assert_eq!(code(&run(dir.path(), &["synth", "--config", "cfg.json", "--out", "s"])), 2);
}

#[test]
fn disjoint_dates_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    small_synth(dir.path(), "1");
    let mut sales = String::from("week_start,country,units\n");
    for d in ["2020-01-06", "2020-01-13", "2020-01-20"] {
        sales.push_str(&format!("{d},Netherlands,100\n"));
    }
    fs::write(dir.path().join("late_sales.csv"), sales).unwrap();
    let out = run(dir.path(), &["ingest", "--tweets", "synth/tweets.jsonl", "--sales", "late_sales.csv", "--out", "o"]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn predict_without_models_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    small_synth(dir.path(), "1");
    fs::create_dir(dir.path().join("empty")).unwrap();
    let out = run(
        dir.path(),
        &["classify", "predict", "--tweets", "synth/tweets.jsonl", "--models", "empty", "--out", "o"],
    );
    assert_eq!(code(&out), 2);
}

#[test]
fn flat_sales_event_study_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let tweets: Vec<f64> = (0..40).map(|i| ((i * 7) % 11) as f64).collect();
    weekly_csv(dir.path(), &tweets, &[50.0; 40]);
    let out = run(dir.path(), &["analyze", "eventstudy", "--series", "series", "--filter", "tweets", "--out", "r"]);
    assert_eq!(code(&out), 4, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn synth_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    small_synth(dir.path(), "3");
    let first = fs::read(dir.path().join("synth/tweets.jsonl")).unwrap();
    let sales = fs::read(dir.path().join("synth/sales.csv")).unwrap();
    small_synth(dir.path(), "3");
    assert_eq!(first, fs::read(dir.path().join("synth/tweets.jsonl")).unwrap());
    assert_eq!(sales, fs::read(dir.path().join("synth/sales.csv")).unwrap());
    small_synth(dir.path(), "4");
    assert_ne!(first, fs::read(dir.path().join("synth/tweets.jsonl")).unwrap());
    assert!(dir.path().join("synth/manifest_synth.json").exists());
}

#[test]
fn ingest_summary_and_weekly_series() {
    let dir = tempfile::tempdir().unwrap();
    small_synth(dir.path(), "2");
    ok(dir.path(), &["ingest", "--tweets", "synth/tweets.jsonl", "--sales", "synth/sales.csv", "--out", "series"]);
    let summary = fs::read_to_string(dir.path().join("series/summary.csv")).unwrap();
    let mut lines = summary.lines();
    assert_eq!(lines.next(), Some("country,tweets"));
    let row = lines.next().unwrap();
    let count: usize = row.strip_prefix("Netherlands,").unwrap().parse().unwrap();
    let kept = fs::read_to_string(dir.path().join("series/tweets_filtered.jsonl")).unwrap().lines().count();
    assert_eq!(count, kept);
    let weekly = fs::read_to_string(dir.path().join("series/weekly.csv")).unwrap();
    assert!(weekly.starts_with("week_start,tweets,sales,tweets_normalized,sales_normalized\n"));
    assert_eq!(weekly.lines().count(), 31);
}

#[test]
fn agreement_is_perfect_without_rater_noise() {
    let dir = tempfile::tempdir().unwrap();
    small_synth(dir.path(), "2");
    ok(dir.path(), &["classify", "agreement", "--labels", "synth/labels.csv", "--out", "agr"]);
    let csv = fs::read_to_string(dir.path().join("agr/agreement.csv")).unwrap();
    assert!(csv.starts_with("dimension,scheme,class,hits,ratings,accuracy\n"));
    for line in csv.lines().skip(1) {
        assert!(line.ends_with(",1.000000"), "{line}");
    }
}

#[test]
fn correlate_flags_shifted_copy() {
    let dir = tempfile::tempdir().unwrap();
    let tweets: Vec<f64> = (0..40).map(|i| ((i * 17) % 23) as f64).collect();
    let sales: Vec<f64> = (0..40).map(|t| if t >= 3 { tweets[t - 3] } else { 11.0 }).collect();
    weekly_csv(dir.path(), &tweets, &sales);
    ok(dir.path(), &["analyze", "correlate", "--series", "series", "--filter", "tweets", "--out", "r"]);
    let csv = fs::read_to_string(dir.path().join("r/correlations.csv")).unwrap();
    let row = csv.lines().nth(1).unwrap();
    assert!(row.starts_with("tweets,"), "{row}");
    assert!(row.contains("+3"), "{row}");
}

#[test]
fn event_sweep_writes_grid() {
    let dir = tempfile::tempdir().unwrap();
    let tweets: Vec<f64> = (0..60).map(|i| if i % 12 == 6 { 90.0 } else { ((i * 5) % 9) as f64 }).collect();
    let sales: Vec<f64> = (0..60).map(|i| 100.0 + ((i * 13) % 7) as f64 + if i % 12 == 7 { 20.0 } else { 0.0 }).collect();
    weekly_csv(dir.path(), &tweets, &sales);
    ok(dir.path(), &["analyze", "eventstudy", "--series", "series", "--filter", "tweets", "--sweep", "--out", "r"]);
    let grid = fs::read_to_string(dir.path().join("r/event_sweep.csv")).unwrap();
    assert!(grid.starts_with("q,w,L,t,p,n_usable,significant\n"));
    assert_eq!(grid.lines().count(), 1 + 4 * 6 * 5);
    assert!(dir.path().join("r/event_study.json").exists());
}

#[test]
fn granger_on_fraction_series() {
    let dir = tempfile::tempdir().unwrap();
    small_synth(dir.path(), "6");
    ok(dir.path(), &["ingest", "--tweets", "synth/tweets.jsonl", "--sales", "synth/sales.csv", "--out", "series"]);
    ok(dir.path(), &["classify", "train", "--tweets", "synth/tweets.jsonl", "--labels", "synth/labels.csv", "--out", "m"]);
    ok(dir.path(), &["classify", "predict", "--tweets", "series/tweets_filtered.jsonl", "--models", "m", "--out", "series"]);
    ok(dir.path(), &["analyze", "granger", "--series", "series", "--fraction", "--lags", "1..3", "--out", "r"]);
    let csv = fs::read_to_string(dir.path().join("r/granger.csv")).unwrap();
    assert!(csv.starts_with("k,F,p,n_eff,flag\n"));
    assert_eq!(csv.lines().count(), 4);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("r/manifest_analyze_granger.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["config"]["fraction"], true);
}
