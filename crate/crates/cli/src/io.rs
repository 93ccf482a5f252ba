use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::Serialize;
use signallab::Series;

use crate::CliError;

/// Record of one invocation, written next to its outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub tool_version: &'static str,
    pub inputs: BTreeMap<String, String>,
    pub config: BTreeMap<String, serde_json::Value>,
    pub seed: Option<u64>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(subcommand: &str) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            tool_version: env!("CARGO_PKG_VERSION"),
            inputs: BTreeMap::new(),
            config: BTreeMap::new(),
            seed: None,
            outputs: Vec::new(),
        }
    }

    pub fn input(&mut self, key: &str, path: &Path) -> &mut Self {
        self.inputs.insert(key.to_string(), path.display().to_string());
        self
    }

    pub fn config(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.config.insert(key.to_string(), serde_json::to_value(value).expect("config value serialises"));
        self
    }

    pub fn file_name(&self) -> String {
        format!("manifest_{}.json", self.subcommand.replace(' ', "_"))
    }

    pub fn write(&self, out: &Path) -> Result<(), CliError> {
        write_json(&out.join(self.file_name()), self)
    }
}

/// Output directory that records every file written into it.
pub struct OutDir {
    pub root: PathBuf,
    pub manifest: RunManifest,
}

impl OutDir {
    pub fn create(root: &Path, manifest: RunManifest) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| CliError::Input(format!("{}: {e}", root.display())))?;
        Ok(Self { root: root.to_path_buf(), manifest })
    }

    pub fn path(&mut self, name: &str) -> PathBuf {
        self.manifest.outputs.push(name.to_string());
        self.root.join(name)
    }

    pub fn writer(&mut self, name: &str) -> Result<BufWriter<File>, CliError> {
        let p = self.path(name);
        let f = File::create(&p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
        Ok(BufWriter::new(f))
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let p = self.path(name);
        write_json(&p, value)
    }

    /// JSON report carrying the name of the manifest that produced it.
    pub fn report<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut v = serde_json::to_value(value).expect("report serialises");
        if let serde_json::Value::Object(map) = &mut v {
            map.insert("manifest".into(), self.manifest.file_name().into());
        }
        self.json(name, &v)
    }

    pub fn finish(self) -> Result<(), CliError> {
        self.manifest.write(&self.root)
    }
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("json serialises");
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn read_to_string(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn fmt_value(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x}"))
}

/// Aligned series as CSV: `week_start` followed by one column per series
/// (named by its label); missing weeks are `NA`.
pub fn write_weekly_csv<W: Write>(w: W, series: &[&Series]) -> Result<(), CliError> {
    let first = series.first().ok_or_else(|| CliError::Input("no series to write".into()))?;
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec!["week_start".to_string()];
    header.extend(series.iter().map(|s| s.label.clone()));
    let io = |e: csv::Error| CliError::Input(e.to_string());
    wtr.write_record(&header).map_err(io)?;
    for i in 0..first.len() {
        let mut rec = vec![first.week_start(i).to_string()];
        rec.extend(series.iter().map(|s| fmt_value(s.get(i))));
        wtr.write_record(&rec).map_err(io)?;
    }
    wtr.flush().map_err(|e| CliError::Input(e.to_string()))
}

pub fn read_weekly_csv(path: &Path) -> Result<Vec<Series>, CliError> {
    let at = |line: usize, msg: String| CliError::Input(format!("{}: line {line}: {msg}", path.display()));
    let mut rdr = csv::Reader::from_reader(open(path)?);
    let headers = rdr.headers().map_err(|e| at(1, e.to_string()))?.clone();
    if headers.get(0) != Some("week_start") || headers.len() < 2 {
        return Err(at(1, "expected week_start followed by series columns".into()));
    }
    let mut start = None;
    let mut columns: Vec<Vec<Option<f64>>> = vec![Vec::new(); headers.len() - 1];
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| at(line, e.to_string()))?;
        let week = NaiveDate::parse_from_str(&rec[0], "%Y-%m-%d").map_err(|e| at(line, format!("week_start: {e}")))?;
        let expected = start.map(|s: NaiveDate| s + chrono::Duration::weeks(i as i64));
        match expected {
            None => start = Some(week),
            Some(e) if e != week => return Err(at(line, format!("expected week {e}, found {week}"))),
            _ => {}
        }
        for (c, col) in columns.iter_mut().enumerate() {
            let raw = rec.get(c + 1).ok_or_else(|| at(line, "missing column".into()))?;
            col.push(if raw == "NA" {
                None
            } else {
                Some(raw.parse().map_err(|_| at(line, format!("bad value '{raw}'")))?)
            });
        }
    }
    let start = start.ok_or_else(|| at(2, "no weeks".into()))?;
    headers
        .iter()
        .skip(1)
        .zip(columns)
        .map(|(name, values)| Series::new(start, values, name).map_err(|e| at(2, e.to_string())))
        .collect()
}
