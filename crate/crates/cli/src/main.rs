mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use signallab::events::EventError;
use signallab::ingest::IngestError;
use signallab::series::SeriesError;
use signallab::tsa::StatsError;

#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed input, bad flags: exit 2.
    Input(String),
    /// Series that cannot be aligned: exit 3.
    Alignment(String),
    /// A statistic could not be computed from the data: exit 4.
    Degenerate(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Alignment(_) => 3,
            CliError::Degenerate(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Alignment(m) | CliError::Degenerate(m) => m,
        }
    }
}

impl From<SeriesError> for CliError {
    fn from(e: SeriesError) -> Self {
        match e {
            SeriesError::NoOverlap | SeriesError::NotAligned(_) => CliError::Alignment(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        match e {
            StatsError::Series(s) => s.into(),
            StatsError::InvalidArgument(m) => CliError::Input(m),
            StatsError::LengthMismatch { .. } => CliError::Alignment(e.to_string()),
            _ => CliError::Degenerate(e.to_string()),
        }
    }
}

impl From<EventError> for CliError {
    fn from(e: EventError) -> Self {
        match e {
            EventError::Series(s) => s.into(),
            EventError::InvalidConfig(m) => CliError::Input(m),
            _ => CliError::Degenerate(e.to_string()),
        }
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::Series(s) => s.into(),
            IngestError::AllMissing | IngestError::NonPositiveMaximum => CliError::Degenerate(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "signallab", version, about = "Relate weekly tweet volumes to sales")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset with a known tweet-to-sales effect.
    Synth(SynthArgs),
    /// Filter tweets to one country and build weekly tweet and sales series.
    Ingest(IngestArgs),
    /// Train classifiers, label tweets, or score rater agreement.
    Classify(ClassifyArgs),
    /// Run a statistical analysis over weekly series.
    Analyze(AnalyzeArgs),
}

#[derive(Args)]
pub struct SynthArgs {
    /// JSON config; defaults are used for missing fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct CountryArgs {
    /// Country name or code with a built-in language and capital.
    #[arg(long, default_value = "Netherlands")]
    pub country: String,
    #[arg(long)]
    pub lang: Option<String>,
    /// Time zone name expected on the country's tweets.
    #[arg(long)]
    pub capital: Option<String>,
}

#[derive(Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub tweets: PathBuf,
    #[arg(long)]
    pub sales: PathBuf,
    #[command(flatten)]
    pub country: CountryArgs,
    #[arg(long)]
    pub from: Option<NaiveDate>,
    #[arg(long)]
    pub to: Option<NaiveDate>,
    /// Warn when the mean weekly tweet count is below this.
    #[arg(long, default_value_t = 40.0)]
    pub min_weekly_tweets: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum ClassifyMode {
    Train,
    Predict,
    Agreement,
}

#[derive(Args)]
pub struct ClassifyArgs {
    #[arg(value_enum)]
    pub mode: ClassifyMode,
    #[arg(long)]
    pub tweets: Option<PathBuf>,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// First-name list; falls back to SIGNALLAB_LEXICON, then the bundled demo list.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Directory holding model_<dimension>.json files (predict).
    #[arg(long)]
    pub models: Option<PathBuf>,
    /// Seed of the train/test split.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 6)]
    pub max_depth: usize,
    #[arg(long, default_value_t = 5)]
    pub min_leaf: usize,
    #[arg(long)]
    pub from: Option<NaiveDate>,
    #[arg(long)]
    pub to: Option<NaiveDate>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Analysis {
    Correlate,
    Adf,
    Granger,
    Eventstudy,
}

#[derive(Args)]
pub struct AnalyzeArgs {
    #[arg(value_enum)]
    pub analysis: Analysis,
    /// Directory with weekly.csv and, after classification, classified_weekly.csv.
    #[arg(long)]
    pub series: PathBuf,
    /// Tweet series to analyse, e.g. per/pc/pos; defaults to positive personal
    /// tweets when classified series exist, else all tweets.
    #[arg(long)]
    pub filter: Option<String>,
    /// Correlation lags run from -max_lag to +max_lag.
    #[arg(long, default_value_t = 4)]
    pub max_lag: i32,
    /// Granger lag depths, e.g. 1..8 or 1,2,3.
    #[arg(long, default_value = "1..8")]
    pub lags: String,
    /// Use the filter's share of all tweets instead of its count.
    #[arg(long)]
    pub fraction: bool,
    /// First-difference both series before testing.
    #[arg(long)]
    pub difference: bool,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1)]
    pub adf_lags: usize,
    /// Peak quantile.
    #[arg(long, default_value_t = 0.90)]
    pub q: f64,
    /// Event window length after the peak week.
    #[arg(long, default_value_t = 3)]
    pub window: usize,
    /// Estimation window length before the peak week.
    #[arg(long, default_value_t = 6)]
    pub est_window: usize,
    #[arg(long)]
    pub two_sided: bool,
    #[arg(long)]
    pub no_merge: bool,
    /// Also run the q / window / estimation-window grid.
    #[arg(long)]
    pub sweep: bool,
    /// Tweets used for follower reach of peak weeks (needs predictions.csv in --series).
    #[arg(long)]
    pub tweets: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Synth(a) => commands::synth(&a),
        Command::Ingest(a) => commands::ingest(&a),
        Command::Classify(a) => commands::classify(&a),
        Command::Analyze(a) => commands::analyze(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
