//! Manual label classes in the raw (ten/three/three) and revised
//! (four/two/two) schemes, and the mapping between them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown {dimension} class '{value}'")]
pub struct UnknownClass {
    pub dimension: &'static str,
    pub value: String,
}

/// A closed set of snake_case class names.
pub trait ClassLabel: Copy + Eq + Ord + fmt::Debug + 'static {
    const DIMENSION: &'static str;
    const ALL: &'static [Self];
    fn as_str(self) -> &'static str;

    fn parse_name(s: &str) -> Result<Self, UnknownClass> {
        let needle = s.trim();
        Self::ALL
            .iter()
            .copied()
            .find(|c| c.as_str().eq_ignore_ascii_case(needle))
            .ok_or_else(|| UnknownClass { dimension: Self::DIMENSION, value: s.to_string() })
    }
}

macro_rules! class_enum {
    ($(#[$meta:meta])* $name:ident, $dim:literal, { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum $name {
            $($variant),+
        }

        impl ClassLabel for $name {
            const DIMENSION: &'static str = $dim;
            const ALL: &'static [Self] = &[$(Self::$variant),+];
            fn as_str(self) -> &'static str {
                match self {
                    $(Self::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = UnknownClass;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                Self::parse_name(s)
            }
        }
    };
}

class_enum!(
    /// Fine-grained tweet type assigned by manual raters.
    RawTweetType, "tweet_type", {
        JobAdvert => "job_advert",
        ProductAdvert => "product_advert",
        CustomerExperience => "customer_experience",
        ResponseToExperience => "response_to_experience",
        Chatter => "chatter",
        WhatWasBought => "what_was_bought",
        InformationRequest => "information_request",
        Advice => "advice",
        News => "news",
        Other => "other",
    }
);

class_enum!(RawUserType, "user_type", {
    Person => "person",
    Company => "company",
    OtherOrganizations => "other_organizations",
});

class_enum!(RawSentiment, "sentiment", {
    Positive => "positive",
    Neutral => "neutral",
    Negative => "negative",
});

class_enum!(
    /// Tweet type after merging the personal-communication and news/other classes.
    TweetType, "tweet_type", {
        JobAdvert => "job_advert",
        ProductAdvert => "product_advert",
        Personal => "personal",
        Other => "other",
    }
);

class_enum!(UserType, "user_type", {
    Person => "person",
    Organization => "organization",
});

class_enum!(Sentiment, "sentiment", {
    Positive => "positive",
    NotPositive => "not_positive",
});

/// One of the three label dimensions; each gets its own classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    TweetType,
    UserType,
    Sentiment,
}

impl Dimension {
    pub const ALL: [Dimension; 3] = [Dimension::TweetType, Dimension::UserType, Dimension::Sentiment];

    pub fn as_str(self) -> &'static str {
        match self {
            Dimension::TweetType => "tweet_type",
            Dimension::UserType => "user_type",
            Dimension::Sentiment => "sentiment",
        }
    }

    /// Revised-scheme class names for this dimension, in declaration order.
    pub fn revised_classes(self) -> Vec<&'static str> {
        match self {
            Dimension::TweetType => TweetType::ALL.iter().map(|c| c.as_str()).collect(),
            Dimension::UserType => UserType::ALL.iter().map(|c| c.as_str()).collect(),
            Dimension::Sentiment => Sentiment::ALL.iter().map(|c| c.as_str()).collect(),
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Dimension {
    type Err = UnknownClass;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Dimension::ALL
            .into_iter()
            .find(|d| d.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| UnknownClass { dimension: "dimension", value: s.to_string() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Raw,
    Revised,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RawTriple {
    pub tweet_type: RawTweetType,
    pub user_type: RawUserType,
    pub sentiment: RawSentiment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RevisedTriple {
    pub tweet_type: TweetType,
    pub user_type: UserType,
    pub sentiment: Sentiment,
}

impl RevisedTriple {
    pub fn new(tweet_type: TweetType, user_type: UserType, sentiment: Sentiment) -> Self {
        Self { tweet_type, user_type, sentiment }
    }

    pub fn class_name(&self, dimension: Dimension) -> &'static str {
        match dimension {
            Dimension::TweetType => self.tweet_type.as_str(),
            Dimension::UserType => self.user_type.as_str(),
            Dimension::Sentiment => self.sentiment.as_str(),
        }
    }

    /// Builds a triple from one class name per dimension.
    pub fn from_names(tweet_type: &str, user_type: &str, sentiment: &str) -> Result<Self, UnknownClass> {
        Ok(Self {
            tweet_type: tweet_type.parse()?,
            user_type: user_type.parse()?,
            sentiment: sentiment.parse()?,
        })
    }
}

impl fmt::Display for RevisedTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.tweet_type, self.user_type, self.sentiment)
    }
}

impl RawTriple {
    pub fn class_name(&self, dimension: Dimension) -> &'static str {
        match dimension {
            Dimension::TweetType => self.tweet_type.as_str(),
            Dimension::UserType => self.user_type.as_str(),
            Dimension::Sentiment => self.sentiment.as_str(),
        }
    }
}

/// A label triple tagged with the scheme it belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum LabelTriple {
    Raw(RawTriple),
    Revised(RevisedTriple),
}

impl LabelTriple {
    pub fn scheme(&self) -> Scheme {
        match self {
            LabelTriple::Raw(_) => Scheme::Raw,
            LabelTriple::Revised(_) => Scheme::Revised,
        }
    }
}

pub fn revise_tweet_type(raw: RawTweetType) -> TweetType {
    use RawTweetType::*;
    match raw {
        JobAdvert => TweetType::JobAdvert,
        ProductAdvert => TweetType::ProductAdvert,
        CustomerExperience | ResponseToExperience | Chatter | WhatWasBought | InformationRequest
        | Advice => TweetType::Personal,
        News | Other => TweetType::Other,
    }
}

pub fn revise_user_type(raw: RawUserType) -> UserType {
    match raw {
        RawUserType::Person => UserType::Person,
        RawUserType::Company | RawUserType::OtherOrganizations => UserType::Organization,
    }
}

pub fn revise_sentiment(raw: RawSentiment) -> Sentiment {
    match raw {
        RawSentiment::Positive => Sentiment::Positive,
        RawSentiment::Neutral | RawSentiment::Negative => Sentiment::NotPositive,
    }
}

/// Maps a triple onto the revised scheme; revised triples map to themselves.
pub fn aggregate_classes(triple: &LabelTriple) -> RevisedTriple {
    match triple {
        LabelTriple::Raw(raw) => RevisedTriple {
            tweet_type: revise_tweet_type(raw.tweet_type),
            user_type: revise_user_type(raw.user_type),
            sentiment: revise_sentiment(raw.sentiment),
        },
        LabelTriple::Revised(revised) => *revised,
    }
}

/// Revised class name for a class name given in either scheme.
pub fn revise_class_name(dimension: Dimension, name: &str) -> Result<&'static str, UnknownClass> {
    Ok(match dimension {
        Dimension::TweetType => match RawTweetType::parse_name(name) {
            Ok(raw) => revise_tweet_type(raw).as_str(),
            Err(_) => TweetType::parse_name(name)?.as_str(),
        },
        Dimension::UserType => match RawUserType::parse_name(name) {
            Ok(raw) => revise_user_type(raw).as_str(),
            Err(_) => UserType::parse_name(name)?.as_str(),
        },
        Dimension::Sentiment => match RawSentiment::parse_name(name) {
            Ok(raw) => revise_sentiment(raw).as_str(),
            Err(_) => Sentiment::parse_name(name)?.as_str(),
        },
    })
}
