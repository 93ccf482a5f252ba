//! Rater consensus and hit/miss agreement accuracy.
//!
//! A rating is a *hit* when at least one of the other two raters of the same
//! tweet chose the same class, and a *miss* otherwise.

use std::collections::BTreeMap;
use std::fmt::Display;

use serde::{Deserialize, Serialize};

use super::labels::{aggregate_classes, Dimension, LabelTriple, Scheme};
use super::ClassifyError;
use crate::ingest::LabelRecord;

pub const RATERS_PER_TWEET: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassAgreement {
    pub hits: usize,
    pub ratings: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub per_class: BTreeMap<String, ClassAgreement>,
    pub overall_accuracy: f64,
    pub hits: usize,
    pub n_ratings: usize,
}

/// Class chosen by at least two of the three raters, if any.
pub fn consensus_label<C: PartialEq + Clone>(votes: &[C]) -> Result<Option<C>, ClassifyError> {
    if votes.len() != RATERS_PER_TWEET {
        return Err(ClassifyError::RatingCount { expected: RATERS_PER_TWEET, got: votes.len() });
    }
    Ok(votes
        .iter()
        .find(|v| votes.iter().filter(|w| w == v).count() >= 2)
        .cloned())
}

pub fn agreement_accuracy<C>(groups: &[Vec<C>]) -> Result<AgreementReport, ClassifyError>
where
    C: PartialEq + Display,
{
    let mut per_class: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    let (mut hits, mut n_ratings) = (0, 0);
    for votes in groups {
        if votes.len() != RATERS_PER_TWEET {
            return Err(ClassifyError::RatingCount { expected: RATERS_PER_TWEET, got: votes.len() });
        }
        for (i, v) in votes.iter().enumerate() {
            let hit = votes.iter().enumerate().any(|(j, w)| j != i && w == v);
            let entry = per_class.entry(v.to_string()).or_default();
            entry.1 += 1;
            n_ratings += 1;
            if hit {
                entry.0 += 1;
                hits += 1;
            }
        }
    }
    let per_class = per_class
        .into_iter()
        .map(|(c, (h, r))| (c, ClassAgreement { hits: h, ratings: r, accuracy: h as f64 / r as f64 }))
        .collect();
    let overall_accuracy = if n_ratings == 0 { 0.0 } else { hits as f64 / n_ratings as f64 };
    Ok(AgreementReport { per_class, overall_accuracy, hits, n_ratings })
}

/// Ratings grouped by tweet id, groups in order of first appearance.
pub fn group_ratings(labels: &[LabelRecord]) -> Vec<(String, Vec<&LabelRecord>)> {
    let mut order: Vec<(String, Vec<&LabelRecord>)> = Vec::new();
    let mut index: std::collections::HashMap<&str, usize> = std::collections::HashMap::new();
    for l in labels {
        match index.get(l.tweet_id.as_str()) {
            Some(&i) => order[i].1.push(l),
            None => {
                index.insert(l.tweet_id.as_str(), order.len());
                order.push((l.tweet_id.clone(), vec![l]));
            }
        }
    }
    order
}

/// Class names of a group of ratings in one dimension and scheme.
pub fn dimension_votes(group: &[&LabelRecord], dimension: Dimension, scheme: Scheme) -> Vec<&'static str> {
    group
        .iter()
        .map(|l| match scheme {
            Scheme::Raw => l.triple().class_name(dimension),
            Scheme::Revised => aggregate_classes(&LabelTriple::Raw(l.triple())).class_name(dimension),
        })
        .collect()
}

/// Agreement report for every tweet's ratings in one dimension and scheme.
pub fn agreement_for_labels(
    labels: &[LabelRecord],
    dimension: Dimension,
    scheme: Scheme,
) -> Result<AgreementReport, ClassifyError> {
    let groups: Vec<Vec<&'static str>> = group_ratings(labels)
        .iter()
        .map(|(_, g)| dimension_votes(g, dimension, scheme))
        .collect();
    agreement_accuracy(&groups)
}
