//! Tweet classification along three label dimensions: tweet type, user type
//! and sentiment.
//!
//! Manual ratings are scored for agreement and merged into a revised scheme;
//! a decision tree per dimension then labels the full corpus from
//! language-independent features only.

pub mod agreement;
pub mod features;
pub mod labels;
pub mod tree;
pub mod weekly;

use thiserror::Error;

pub use agreement::{agreement_accuracy, agreement_for_labels, consensus_label, AgreementReport};
pub use features::{extract_features, NameLexicon, TweetFeatures, DEFAULT_EMOTICONS};
pub use labels::{aggregate_classes, Dimension, LabelTriple, RevisedTriple, Scheme};
pub use tree::{train_tree, DecisionTree, TrainReport, TreeParams};
pub use weekly::{classified_weekly_counts, standard_filters, TripleFilter};

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("expected {expected} ratings per tweet, got {got}")]
    RatingCount { expected: usize, got: usize },
    #[error("no training examples")]
    EmptyTrainingSet,
    #[error("invalid tree parameters: {0}")]
    InvalidParams(String),
    #[error("malformed tree: {0}")]
    MalformedTree(String),
    #[error("invalid filter '{0}', expected user/tweet/sentiment such as per/pc/pos")]
    InvalidFilter(String),
}
