//! Weekly tweet counts restricted to a class filter.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::labels::{RevisedTriple, Sentiment, TweetType, UserType};
use super::ClassifyError;
use crate::ingest::{aggregate_weekly, TweetRecord};
use crate::scalar::Real;
use crate::series::{WeekRange, WeeklySeries};

/// Conjunction of optional per-dimension constraints; `None` means "all".
///
/// Written as `user/tweet/sentiment`, e.g. `per/pc/pos` for positive
/// personal tweets by persons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct TripleFilter {
    pub user_type: Option<UserType>,
    pub tweet_type: Option<TweetType>,
    pub sentiment: Option<Sentiment>,
}

impl TripleFilter {
    pub const ALL: TripleFilter = TripleFilter { user_type: None, tweet_type: None, sentiment: None };

    pub fn new(user_type: Option<UserType>, tweet_type: Option<TweetType>, sentiment: Option<Sentiment>) -> Self {
        Self { user_type, tweet_type, sentiment }
    }

    /// Positive personal tweets by persons.
    pub fn positive_personal() -> Self {
        Self::new(Some(UserType::Person), Some(TweetType::Personal), Some(Sentiment::Positive))
    }

    pub fn matches(&self, t: &RevisedTriple) -> bool {
        self.user_type.is_none_or(|u| u == t.user_type)
            && self.tweet_type.is_none_or(|c| c == t.tweet_type)
            && self.sentiment.is_none_or(|s| s == t.sentiment)
    }
}

impl fmt::Display for TripleFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let user = match self.user_type {
            None => "all",
            Some(UserType::Person) => "per",
            Some(UserType::Organization) => "org",
        };
        let tweet = match self.tweet_type {
            None => "all",
            Some(TweetType::ProductAdvert) => "ad",
            Some(TweetType::Personal) => "pc",
            Some(TweetType::JobAdvert) => "job",
            Some(TweetType::Other) => "other",
        };
        let sent = match self.sentiment {
            None => "all",
            Some(Sentiment::Positive) => "pos",
            Some(Sentiment::NotPositive) => "notpos",
        };
        write!(f, "{user}/{tweet}/{sent}")
    }
}

impl FromStr for TripleFilter {
    type Err = ClassifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ClassifyError::InvalidFilter(s.to_string());
        let parts: Vec<&str> = s.trim().split('/').collect();
        let [user, tweet, sent] = parts.as_slice() else {
            return Err(bad());
        };
        let user_type = match *user {
            "all" => None,
            "per" => Some(UserType::Person),
            "org" => Some(UserType::Organization),
            _ => return Err(bad()),
        };
        let tweet_type = match *tweet {
            "all" => None,
            "ad" => Some(TweetType::ProductAdvert),
            "pc" => Some(TweetType::Personal),
            "job" => Some(TweetType::JobAdvert),
            "other" => Some(TweetType::Other),
            _ => return Err(bad()),
        };
        let sentiment = match *sent {
            "all" => None,
            "pos" => Some(Sentiment::Positive),
            "notpos" => Some(Sentiment::NotPositive),
            _ => return Err(bad()),
        };
        Ok(Self { user_type, tweet_type, sentiment })
    }
}

/// Row filters of the standard tweets-versus-sales correlation table:
/// users all/per/org crossed with all tweets, positive tweets, product
/// adverts, personal communication and positive personal communication.
/// Organisations get no personal-communication rows.
pub fn standard_filters() -> Vec<TripleFilter> {
    let tweet_rows = [
        (None, None),
        (None, Some(Sentiment::Positive)),
        (Some(TweetType::ProductAdvert), None),
        (Some(TweetType::Personal), None),
        (Some(TweetType::Personal), Some(Sentiment::Positive)),
    ];
    let mut out = Vec::new();
    for user in [None, Some(UserType::Person), Some(UserType::Organization)] {
        for &(tweet, sent) in &tweet_rows {
            if user == Some(UserType::Organization) && tweet == Some(TweetType::Personal) {
                continue;
            }
            out.push(TripleFilter::new(user, tweet, sent));
        }
    }
    out
}

/// Weekly counts of classified tweets whose triple passes `filter`.
pub fn classified_weekly_counts<T: Real>(
    tweets: &[(TweetRecord, RevisedTriple)],
    filter: &TripleFilter,
    range: &WeekRange,
) -> WeeklySeries<T> {
    let stamps: Vec<_> = tweets.iter().filter(|(_, t)| filter.matches(t)).map(|(r, _)| r.created_at).collect();
    aggregate_weekly(&stamps, range, &filter.to_string()).0
}

/// Weekly sums of author follower counts over tweets passing `filter`.
pub fn classified_weekly_followers<T: Real>(
    tweets: &[(TweetRecord, RevisedTriple)],
    filter: &TripleFilter,
    range: &WeekRange,
) -> WeeklySeries<T> {
    let mut sums = vec![0u64; range.n_weeks()];
    for (r, t) in tweets {
        if filter.matches(t) {
            if let Some(i) = range.index_of(&r.created_at) {
                sums[i] += r.followers;
            }
        }
    }
    WeeklySeries {
        start_week: range.first_week(),
        values: sums.into_iter().map(|s| Some(T::lit(s as f64))).collect(),
        label: format!("followers {filter}"),
    }
}
