//! Language-independent tweet features.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::ingest::TweetRecord;

pub const N_FEATURES: usize = 12;

/// Names of the feature vector entries, in index order.
pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "retweet_count",
    "is_retweet",
    "n_hyperlinks",
    "n_hashtags",
    "n_mentions",
    "has_emoticon",
    "n_question_marks",
    "n_exclamation_marks",
    "followers",
    "friends",
    "statuses_count",
    "username_has_first_name",
];

/// Emoticons recognised by [`extract_features`] unless a custom set is given.
pub const DEFAULT_EMOTICONS: [&str; 11] = [":)", ":-)", ":(", ":-(", ":D", ";)", ";-)", ":P", ":p", "=)", "=("];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TweetFeatures {
    pub retweet_count: u64,
    pub is_retweet: bool,
    pub n_hyperlinks: u32,
    pub n_hashtags: u32,
    pub n_mentions: u32,
    pub has_emoticon: bool,
    pub n_question_marks: u32,
    pub n_exclamation_marks: u32,
    pub followers: u64,
    pub friends: u64,
    pub statuses_count: u64,
    pub username_has_first_name: bool,
}

impl TweetFeatures {
    /// Numeric view used for tree splits; booleans become 0/1.
    pub fn to_vector(&self) -> [f64; N_FEATURES] {
        let b = |v: bool| if v { 1.0 } else { 0.0 };
        [
            self.retweet_count as f64,
            b(self.is_retweet),
            f64::from(self.n_hyperlinks),
            f64::from(self.n_hashtags),
            f64::from(self.n_mentions),
            b(self.has_emoticon),
            f64::from(self.n_question_marks),
            f64::from(self.n_exclamation_marks),
            self.followers as f64,
            self.friends as f64,
            self.statuses_count as f64,
            b(self.username_has_first_name),
        ]
    }
}

/// Lower-case first names, one per line; blank lines and `#` comments skipped.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NameLexicon {
    names: HashSet<String>,
}

impl NameLexicon {
    pub fn parse(text: &str) -> Self {
        let names = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(str::to_lowercase)
            .collect();
        Self { names }
    }

    pub fn from_names<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self { names: names.into_iter().map(|s| s.as_ref().to_lowercase()).collect() }
    }

    pub fn contains(&self, name: &str) -> bool {
        self.names.contains(name)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// True when any maximal alphabetic run of `handle` is a known name.
    pub fn matches_any_run(&self, handle: &str) -> bool {
        handle
            .split(|c: char| !c.is_alphabetic())
            .filter(|run| !run.is_empty())
            .any(|run| self.names.contains(&run.to_lowercase()))
    }
}

/// Small demo lexicon shipped with the crate.
pub const DEMO_LEXICON: &str = include_str!("../../data/first_names.txt");

/// Counts `marker` followed immediately by a character accepted by `follow`.
fn count_marker(text: &str, marker: char, follow: impl Fn(char) -> bool) -> u32 {
    let mut n = 0;
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if c == marker && chars.peek().is_some_and(|&next| follow(next)) {
            n += 1;
        }
    }
    n
}

pub fn extract_features(tweet: &TweetRecord, lexicon: &NameLexicon, emoticons: &[&str]) -> TweetFeatures {
    let text = tweet.text.as_str();
    let n_links = text.matches("http://").count() + text.matches("https://").count();
    TweetFeatures {
        retweet_count: tweet.retweet_count,
        is_retweet: tweet.is_retweet,
        n_hyperlinks: n_links as u32,
        n_hashtags: count_marker(text, '#', char::is_alphanumeric),
        n_mentions: count_marker(text, '@', |c| c.is_alphanumeric() || c == '_'),
        has_emoticon: emoticons.iter().any(|e| text.contains(e)),
        n_question_marks: text.matches('?').count() as u32,
        n_exclamation_marks: text.matches('!').count() as u32,
        followers: tweet.followers,
        friends: tweet.friends,
        statuses_count: tweet.statuses_count,
        username_has_first_name: lexicon.matches_any_run(&tweet.user_screen_name)
            || lexicon.matches_any_run(&tweet.user_name),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{TimeZone, Utc};

    fn tweet(text: &str, screen: &str) -> TweetRecord {
        TweetRecord {
            id: "1".into(),
            text: text.into(),
            created_at: Utc.with_ymd_and_hms(2012, 1, 2, 0, 0, 0).unwrap(),
            user_name: screen.into(),
            user_screen_name: screen.into(),
            followers: 10,
            friends: 20,
            statuses_count: 30,
            retweet_count: 4,
            is_retweet: true,
            user_timezone: "Amsterdam".into(),
            language: "nl".into(),
        }
    }

    #[test]
    fn text_counts() {
        let lex = NameLexicon::from_names(["anna"]);
        let f = extract_features(&tweet("Great prints! http://t.co/x #happy @acme :)", "shop"), &lex, &DEFAULT_EMOTICONS);
        assert_eq!(f.n_exclamation_marks, 1);
        assert_eq!(f.n_hyperlinks, 1);
        assert_eq!(f.n_hashtags, 1);
        assert_eq!(f.n_mentions, 1);
        assert!(f.has_emoticon);
        assert_eq!(f.n_question_marks, 0);
        assert_eq!((f.retweet_count, f.is_retweet, f.followers, f.friends, f.statuses_count), (4, true, 10, 20, 30));
    }

    #[test]
    fn first_name_in_screen_name() {
        let lex = NameLexicon::from_names(["anna"]);
        let f = extract_features(&tweet("", "anna_k93"), &lex, &DEFAULT_EMOTICONS);
        assert!(f.username_has_first_name);
        // runs must match whole: "annabel" is not "anna"
        let f = extract_features(&tweet("", "annabel"), &lex, &DEFAULT_EMOTICONS);
        assert!(!f.username_has_first_name);
    }

    #[test]
    fn empty_text() {
        let lex = NameLexicon::from_names(["anna"]);
        let f = extract_features(&tweet("", "x9"), &lex, &DEFAULT_EMOTICONS);
        assert_eq!(
            (f.n_hyperlinks, f.n_hashtags, f.n_mentions, f.n_question_marks, f.n_exclamation_marks),
            (0, 0, 0, 0, 0)
        );
        assert!(!f.has_emoticon);
        assert!(!f.username_has_first_name);
    }

    #[test]
    fn markers_need_a_following_word_character() {
        let lex = NameLexicon::default();
        let f = extract_features(&tweet("# @ #1 @_x a@b ## https://a http://b ?!?", "x"), &lex, &DEFAULT_EMOTICONS);
        assert_eq!(f.n_hashtags, 1);
        assert_eq!(f.n_mentions, 2);
        assert_eq!(f.n_hyperlinks, 2);
        assert_eq!((f.n_question_marks, f.n_exclamation_marks), (2, 1));
    }

    #[test]
    fn lexicon_file_format() {
        let lex = NameLexicon::parse("# names\nAnna\n\npieter  # dutch\n");
        assert_eq!(lex.len(), 2);
        assert!(lex.contains("anna") && lex.contains("pieter"));
        assert!(NameLexicon::parse(DEMO_LEXICON).contains("maria"));
    }
}
