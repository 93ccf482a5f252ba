//! Seeded synthetic tweet and sales datasets with a known causal structure.
//!
//! Weekly tweet counts are Poisson per revised class. Every tweet carries
//! metadata that the feature extractor maps back to its class: persons have
//! first-name handles, adverts have links and high status counts (job adverts
//! with two or more hashtags), positive tweets contain `!`. Sales follow a
//! seasonal base plus a lagged effect of one source class and Gaussian noise.
//!
//! All randomness comes from `Pcg64` seeded with `seed_from_u64(seed)`.

use chrono::{Datelike, Duration, NaiveDate, TimeZone, Utc};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal, Poisson};
use rand_pcg::Pcg64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::features::{NameLexicon, DEMO_LEXICON};
use crate::classify::labels::{
    revise_sentiment, revise_tweet_type, revise_user_type, ClassLabel, RawSentiment, RawTweetType, RawUserType,
    RevisedTriple, Sentiment, TweetType, UserType,
};
use crate::ingest::{LabelRecord, SalesRecord, TweetRecord};

pub const MIN_WEEKS: usize = 20;
pub const MAX_EFFECT_LAG: usize = 8;

/// Status counts at or above this mark advert accounts.
pub const ADVERT_STATUSES: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("invalid synth config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassRate {
    pub triple: RevisedTriple,
    /// Mean tweets per week.
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Effect {
    pub source: RevisedTriple,
    pub lags: Vec<usize>,
    /// Sales units per source tweet.
    pub coefficient: f64,
}

/// Extra tweets of one class in one week. They do not drive sales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpamSpike {
    pub week: usize,
    pub triple: RevisedTriple,
    pub magnitude: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthCountry {
    pub name: String,
    pub language: String,
    pub capital: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_weeks: usize,
    /// Monday of the first week.
    pub start: NaiveDate,
    pub base_sales: f64,
    /// Multiplier for ISO weeks 26 to 34.
    pub summer_dip: f64,
    /// Multiplier for ISO weeks 48 to 52.
    pub december_peak: f64,
    pub class_rates: Vec<ClassRate>,
    pub effect: Effect,
    pub spam_spikes: Vec<SpamSpike>,
    pub noise_sd: f64,
    pub country: SynthCountry,
    /// Mean weekly tweets from another country, dropped by the country filter.
    pub foreign_rate: f64,
    pub raters: usize,
    pub rater_noise: f64,
}

fn triple(t: TweetType, u: UserType, s: Sentiment) -> RevisedTriple {
    RevisedTriple::new(t, u, s)
}

impl Default for SynthConfig {
    fn default() -> Self {
        use Sentiment::*;
        use TweetType::*;
        use UserType::*;
        let rate = |t, u, s, rate| ClassRate { triple: triple(t, u, s), rate };
        Self {
            seed: 0,
            n_weeks: 91,
            start: NaiveDate::from_ymd_opt(2012, 1, 2).expect("valid date"),
            base_sales: 200.0,
            summer_dip: 0.8,
            december_peak: 1.5,
            class_rates: vec![
                rate(Personal, Person, Positive, 60.0),
                rate(Personal, Person, NotPositive, 80.0),
                rate(ProductAdvert, Person, Positive, 4.0),
                rate(Other, Person, NotPositive, 10.0),
                rate(ProductAdvert, Organization, Positive, 25.0),
                rate(ProductAdvert, Organization, NotPositive, 15.0),
                rate(JobAdvert, Organization, NotPositive, 10.0),
                rate(Other, Organization, NotPositive, 10.0),
            ],
            effect: Effect { source: triple(Personal, Person, Positive), lags: vec![3, 4], coefficient: 4.0 },
            spam_spikes: Vec::new(),
            noise_sd: 10.0,
            country: SynthCountry { name: "Netherlands".into(), language: "nl".into(), capital: "Amsterdam".into() },
            foreign_rate: 5.0,
            raters: 3,
            rater_noise: 0.0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidConfig(m));
        if self.n_weeks < MIN_WEEKS {
            return bad(format!("n_weeks {} below minimum {MIN_WEEKS}", self.n_weeks));
        }
        if self.start.weekday() != chrono::Weekday::Mon {
            return bad(format!("start {} is not a Monday", self.start));
        }
        if !(self.base_sales > 0.0 && self.base_sales.is_finite()) {
            return bad("base_sales must be positive".into());
        }
        if !(self.summer_dip > 0.0 && self.december_peak > 0.0) {
            return bad("seasonal factors must be positive".into());
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return bad("noise_sd must be non-negative".into());
        }
        if let Some(r) = self.class_rates.iter().find(|r| !(r.rate >= 0.0 && r.rate.is_finite())) {
            return bad(format!("rate for {} must be non-negative", r.triple));
        }
        if !(self.foreign_rate >= 0.0 && self.foreign_rate.is_finite()) {
            return bad("foreign_rate must be non-negative".into());
        }
        if let Some(l) = self.effect.lags.iter().find(|&&l| !(1..=MAX_EFFECT_LAG).contains(&l)) {
            return bad(format!("effect lag {l} outside 1..={MAX_EFFECT_LAG}"));
        }
        if !self.effect.coefficient.is_finite() {
            return bad("effect coefficient must be finite".into());
        }
        if let Some(s) = self.spam_spikes.iter().find(|s| s.week >= self.n_weeks) {
            return bad(format!("spam spike week {} beyond n_weeks", s.week));
        }
        if self.raters == 0 {
            return bad("raters must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.rater_noise) {
            return bad(format!("rater_noise {} outside [0, 1)", self.rater_noise));
        }
        Ok(())
    }

    /// Seasonal multiplier for the week starting on `week_start`.
    pub fn season(&self, week_start: NaiveDate) -> f64 {
        match week_start.iso_week().week() {
            26..=34 => self.summer_dip,
            48..=52 => self.december_peak,
            _ => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub triple: RevisedTriple,
    /// Poisson draws per emitted week, spam excluded.
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TweetTruth {
    pub tweet_id: String,
    pub triple: RevisedTriple,
    pub spam: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub seed: u64,
    pub start: NaiveDate,
    pub n_weeks: usize,
    pub effect: Effect,
    pub weekly_counts: Vec<ClassCounts>,
    /// Source counts for the weeks before the first one, oldest first.
    pub burn_in_source_counts: Vec<u64>,
    /// Seasonal base plus effect, before noise and clamping.
    pub noiseless_sales: Vec<f64>,
    /// One entry per in-country tweet, in emission order.
    pub tweets: Vec<TweetTruth>,
}

impl GroundTruth {
    pub fn counts_for(&self, t: &RevisedTriple) -> Option<&[u64]> {
        self.weekly_counts.iter().find(|c| c.triple == *t).map(|c| c.counts.as_slice())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub tweets: Vec<TweetRecord>,
    pub sales: Vec<SalesRecord>,
    pub truth: GroundTruth,
}

const ORG_WORDS: [&str; 12] =
    ["store", "shop", "deals", "outlet", "retail", "vacatures", "nieuws", "official", "group", "media", "online", "direct"];
const FILLER: [&str; 12] =
    ["the", "new", "today", "order", "got", "week", "look", "price", "nice", "store", "delivery", "sale"];
const TAGS: [&str; 6] = ["#sale", "#jobs", "#vacature", "#deal", "#new", "#work"];

fn poisson(rng: &mut Pcg64, rate: f64) -> u64 {
    if rate <= 0.0 {
        return 0;
    }
    Poisson::new(rate).expect("positive finite rate").sample(rng) as u64
}

struct TweetFactory<'a> {
    names: Vec<String>,
    country: &'a SynthCountry,
    next_id: u64,
}

impl TweetFactory<'_> {
    fn make(&mut self, rng: &mut Pcg64, t: &RevisedTriple, week_start: NaiveDate, foreign: bool) -> TweetRecord {
        let id = format!("s{:07}", self.next_id);
        self.next_id += 1;
        let (user_name, screen) = match t.user_type {
            UserType::Person => {
                let name = self.names.choose(rng).expect("non-empty lexicon").clone();
                let mut cap = name.clone();
                cap[..1].make_ascii_uppercase();
                (cap, format!("{name}_{}", rng.random_range(1..1000)))
            }
            UserType::Organization => {
                let word = ORG_WORDS.choose(rng).expect("non-empty");
                (format!("{word} {}", rng.random_range(1..100)), format!("{word}_{}", rng.random_range(1..1000)))
            }
        };
        let advert = matches!(t.tweet_type, TweetType::JobAdvert | TweetType::ProductAdvert);
        let statuses = if advert { rng.random_range(ADVERT_STATUSES..60_000) } else { rng.random_range(20..3_000) };
        let n_tags = match t.tweet_type {
            TweetType::JobAdvert => rng.random_range(2..=3),
            TweetType::ProductAdvert | TweetType::Personal => rng.random_range(0..=1),
            TweetType::Other => 0,
        };
        let mut words: Vec<String> =
            (0..rng.random_range(4..10)).map(|_| FILLER.choose(rng).expect("non-empty").to_string()).collect();
        words.extend((0..n_tags).map(|i| TAGS[(i + rng.random_range(0..TAGS.len())) % TAGS.len()].to_string()));
        if t.tweet_type != TweetType::Personal {
            words.push(format!("https://example.com/{id}"));
        }
        let mut text = words.join(" ");
        if t.sentiment == Sentiment::Positive {
            text.push_str(&"!".repeat(rng.random_range(1..=2)));
        }
        let offset = Duration::seconds(rng.random_range(0..7 * 86_400));
        let created_at = Utc.from_utc_datetime(&week_start.and_hms_opt(0, 0, 0).expect("midnight")) + offset;
        let followers = match t.user_type {
            UserType::Person => rng.random_range(5..2_000),
            UserType::Organization => rng.random_range(200..30_000),
        };
        let (language, timezone) = if foreign {
            (FOREIGN_LANGUAGE.to_string(), FOREIGN_TIMEZONE.to_string())
        } else {
            (self.country.language.clone(), self.country.capital.clone())
        };
        TweetRecord {
            id,
            text,
            created_at,
            user_name,
            user_screen_name: screen,
            followers,
            friends: rng.random_range(0..1_500),
            statuses_count: statuses,
            retweet_count: rng.random_range(0..5),
            is_retweet: rng.random_bool(0.1),
            user_timezone: timezone,
            language,
        }
    }
}

const FOREIGN_LANGUAGE: &str = "xx";
const FOREIGN_TIMEZONE: &str = "Elsewhere";

pub fn generate_dataset(cfg: &SynthConfig) -> Result<Dataset, SynthError> {
    cfg.validate()?;
    let mut rng = Pcg64::seed_from_u64(cfg.seed);
    let lexicon = NameLexicon::parse(DEMO_LEXICON);
    let mut names: Vec<String> = DEMO_LEXICON
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim().to_string())
        .filter(|l| !l.is_empty())
        .collect();
    names.retain(|n| lexicon.contains(n));
    let mut factory = TweetFactory { names, country: &cfg.country, next_id: 0 };

    let max_lag = cfg.effect.lags.iter().copied().max().unwrap_or(0);
    let source_rate: f64 =
        cfg.class_rates.iter().filter(|r| r.triple == cfg.effect.source).map(|r| r.rate).sum();
    let burn_in: Vec<u64> = (0..max_lag).map(|_| poisson(&mut rng, source_rate)).collect();

    let mut weekly_counts: Vec<ClassCounts> =
        cfg.class_rates.iter().map(|r| ClassCounts { triple: r.triple, counts: Vec::with_capacity(cfg.n_weeks) }).collect();
    let mut tweets = Vec::new();
    let mut truth_tweets = Vec::new();
    for week in 0..cfg.n_weeks {
        let week_start = cfg.start + Duration::weeks(week as i64);
        for (rate, counts) in cfg.class_rates.iter().zip(weekly_counts.iter_mut()) {
            let n = poisson(&mut rng, rate.rate);
            counts.counts.push(n);
            for _ in 0..n {
                let tw = factory.make(&mut rng, &rate.triple, week_start, false);
                truth_tweets.push(TweetTruth { tweet_id: tw.id.clone(), triple: rate.triple, spam: false });
                tweets.push(tw);
            }
        }
        for spike in cfg.spam_spikes.iter().filter(|s| s.week == week) {
            for _ in 0..spike.magnitude {
                let tw = factory.make(&mut rng, &spike.triple, week_start, false);
                truth_tweets.push(TweetTruth { tweet_id: tw.id.clone(), triple: spike.triple, spam: true });
                tweets.push(tw);
            }
        }
        for _ in 0..poisson(&mut rng, cfg.foreign_rate) {
            let t = cfg.class_rates.choose(&mut rng).map_or(cfg.effect.source, |r| r.triple);
            tweets.push(factory.make(&mut rng, &t, week_start, true));
        }
    }

    // source counts summed over every class entry matching the source triple
    let source: Vec<u64> = (0..cfg.n_weeks)
        .map(|w| weekly_counts.iter().filter(|c| c.triple == cfg.effect.source).map(|c| c.counts[w]).sum())
        .collect();
    let source_at = |t: isize| -> u64 {
        if t >= 0 {
            source[t as usize]
        } else {
            burn_in[(max_lag as isize + t) as usize]
        }
    };
    let noise = Normal::new(0.0, cfg.noise_sd).expect("valid noise sd");
    let mut noiseless_sales = Vec::with_capacity(cfg.n_weeks);
    let mut sales = Vec::with_capacity(cfg.n_weeks);
    for week in 0..cfg.n_weeks {
        let week_start = cfg.start + Duration::weeks(week as i64);
        let driven: u64 = cfg.effect.lags.iter().map(|&l| source_at(week as isize - l as isize)).sum();
        let clean = cfg.base_sales * cfg.season(week_start) + cfg.effect.coefficient * driven as f64;
        let units = (clean + noise.sample(&mut rng)).max(0.0);
        noiseless_sales.push(clean);
        sales.push(SalesRecord { week_start, country: cfg.country.name.clone(), units });
    }

    Ok(Dataset {
        tweets,
        sales,
        truth: GroundTruth {
            seed: cfg.seed,
            start: cfg.start,
            n_weeks: cfg.n_weeks,
            effect: cfg.effect.clone(),
            weekly_counts,
            burn_in_source_counts: burn_in,
            noiseless_sales,
            tweets: truth_tweets,
        },
    })
}

fn preimage<R: ClassLabel, C: PartialEq>(class: C, revise: impl Fn(R) -> C) -> Vec<R> {
    R::ALL.iter().copied().filter(|&r| revise(r) == class).collect()
}

fn flip<C: ClassLabel, G: Rng>(class: C, noise: f64, rng: &mut G) -> C {
    if noise > 0.0 && rng.random_bool(noise) {
        let others: Vec<C> = C::ALL.iter().copied().filter(|&c| c != class).collect();
        *others.choose(rng).expect("two or more classes")
    } else {
        class
    }
}

fn raw_for<R: ClassLabel, C: PartialEq + Copy, G: Rng>(
    class: C,
    representative: R,
    revise: impl Fn(R) -> C + Copy,
    rng: &mut G,
) -> R {
    if revise(representative) == class {
        representative
    } else {
        *preimage(class, revise).choose(rng).expect("every revised class has a raw preimage")
    }
}

/// Simulated manual ratings. Each rater independently replaces the true
/// revised class of each dimension by a uniformly chosen other class with
/// probability `rater_noise`. Ratings are written in the raw scheme: each
/// tweet gets one raw triple drawn from the preimage of its true class, and a
/// rater who changed a class draws from the preimage of the new one.
pub fn label_sample<G: Rng>(
    truth: &[(String, RevisedTriple)],
    raters: usize,
    rater_noise: f64,
    rng: &mut G,
) -> Result<Vec<LabelRecord>, SynthError> {
    if !(0.0..1.0).contains(&rater_noise) {
        return Err(SynthError::InvalidConfig(format!("rater_noise {rater_noise} outside [0, 1)")));
    }
    let mut out = Vec::with_capacity(truth.len() * raters);
    for (id, t) in truth {
        let rep_t = *preimage(t.tweet_type, revise_tweet_type).choose(rng).expect("preimage");
        let rep_u = *preimage(t.user_type, revise_user_type).choose(rng).expect("preimage");
        let rep_s = *preimage(t.sentiment, revise_sentiment).choose(rng).expect("preimage");
        for r in 0..raters {
            let tt = flip(t.tweet_type, rater_noise, rng);
            let ut = flip(t.user_type, rater_noise, rng);
            let st = flip(t.sentiment, rater_noise, rng);
            out.push(LabelRecord {
                tweet_id: id.clone(),
                rater_id: format!("r{}", r + 1),
                tweet_type: raw_for::<RawTweetType, _, _>(tt, rep_t, revise_tweet_type, rng),
                user_type: raw_for::<RawUserType, _, _>(ut, rep_u, revise_user_type, rng),
                sentiment: raw_for::<RawSentiment, _, _>(st, rep_s, revise_sentiment, rng),
            });
        }
    }
    Ok(out)
}

/// Ratings for every non-spam tweet of a dataset, seeded from the config.
pub fn dataset_labels(cfg: &SynthConfig, truth: &GroundTruth) -> Result<Vec<LabelRecord>, SynthError> {
    let pairs: Vec<(String, RevisedTriple)> =
        truth.tweets.iter().filter(|t| !t.spam).map(|t| (t.tweet_id.clone(), t.triple)).collect();
    // separate stream so labels do not perturb the dataset draws
    let mut rng = Pcg64::seed_from_u64(cfg.seed ^ 0x6c61_6265_6c73);
    label_sample(&pairs, cfg.raters, cfg.rater_noise, &mut rng)
}
