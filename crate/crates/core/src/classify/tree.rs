//! CART decision tree over [`TweetFeatures`], one tree per label dimension.
//!
//! Splits are greedy binary thresholds minimising weighted Gini impurity.
//! Candidate thresholds are midpoints between consecutive distinct feature
//! values; ties go to the lowest feature index, then the lowest threshold.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_pcg::Pcg64;
use serde::{Deserialize, Serialize};

use super::features::{TweetFeatures, FEATURE_NAMES, N_FEATURES};
use super::labels::Dimension;
use super::ClassifyError;

/// Share of examples used for training; the rest is held out.
pub const TRAIN_FRACTION: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
    pub split_seed: u64,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self { max_depth: 6, min_leaf: 5, split_seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeNode {
    /// Goes `left` when `features[feature] <= threshold`.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf { class: String, histogram: BTreeMap<String, usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub target: Dimension,
    /// Node 0 is the root.
    pub nodes: Vec<TreeNode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub target: Dimension,
    pub accuracy_overall: f64,
    pub accuracy_per_class: BTreeMap<String, f64>,
    pub split_seed: u64,
    pub n_train: usize,
    pub n_test: usize,
    pub depth: usize,
    pub n_leaves: usize,
}

struct Builder<'a> {
    rows: &'a [[f64; N_FEATURES]],
    labels: &'a [usize],
    classes: &'a [String],
    max_depth: usize,
    min_leaf: usize,
    nodes: Vec<TreeNode>,
}

impl Builder<'_> {
    fn histogram(&self, idx: &[usize]) -> Vec<usize> {
        let mut h = vec![0; self.classes.len()];
        for &i in idx {
            h[self.labels[i]] += 1;
        }
        h
    }

    fn leaf(&self, counts: &[usize]) -> TreeNode {
        // first maximum in sorted class order
        let best = counts
            .iter()
            .enumerate()
            .fold(0, |best, (c, &n)| if n > counts[best] { c } else { best });
        let histogram = counts
            .iter()
            .enumerate()
            .filter(|(_, &n)| n > 0)
            .map(|(c, &n)| (self.classes[c].clone(), n))
            .collect();
        TreeNode::Leaf { class: self.classes[best].clone(), histogram }
    }

    /// Best `(feature, threshold)` by weighted Gini, if any admissible split exists.
    fn best_split(&self, idx: &[usize], parent: &[usize]) -> Option<(usize, f64)> {
        let n = idx.len();
        let mut best: Option<(f64, usize, f64)> = None;
        let mut sorted = idx.to_vec();
        for f in 0..N_FEATURES {
            sorted.sort_by(|&a, &b| self.rows[a][f].total_cmp(&self.rows[b][f]).then(a.cmp(&b)));
            let mut left = vec![0usize; parent.len()];
            let mut right = parent.to_vec();
            // sums of squared class counts on each side
            let mut sq_left: u64 = 0;
            let mut sq_right: u64 = right.iter().map(|&c| (c * c) as u64).sum();
            for pos in 0..n - 1 {
                let c = self.labels[sorted[pos]];
                sq_left += (2 * left[c] + 1) as u64;
                left[c] += 1;
                sq_right -= (2 * right[c] - 1) as u64;
                right[c] -= 1;
                let n_left = pos + 1;
                let n_right = n - n_left;
                if n_left < self.min_leaf || n_right < self.min_leaf {
                    continue;
                }
                let (lo, hi) = (self.rows[sorted[pos]][f], self.rows[sorted[pos + 1]][f]);
                if lo >= hi {
                    continue;
                }
                // maximising this minimises n * weighted Gini
                let score = sq_left as f64 / n_left as f64 + sq_right as f64 / n_right as f64;
                if best.is_none_or(|(s, _, _)| score > s) {
                    best = Some((score, f, lo + (hi - lo) / 2.0));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }

    fn build(&mut self, idx: &mut [usize], depth: usize) -> usize {
        let counts = self.histogram(idx);
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let id = self.nodes.len();
        let split = if pure || depth >= self.max_depth || idx.len() < 2 * self.min_leaf {
            None
        } else {
            self.best_split(idx, &counts)
        };
        let Some((feature, threshold)) = split else {
            let leaf = self.leaf(&counts);
            self.nodes.push(leaf);
            return id;
        };
        self.nodes.push(TreeNode::Split { feature, threshold, left: 0, right: 0 });
        let mut left: Vec<usize> = idx.iter().copied().filter(|&i| self.rows[i][feature] <= threshold).collect();
        let mut right: Vec<usize> = idx.iter().copied().filter(|&i| self.rows[i][feature] > threshold).collect();
        let l = self.build(&mut left, depth + 1);
        let r = self.build(&mut right, depth + 1);
        if let TreeNode::Split { left, right, .. } = &mut self.nodes[id] {
            *left = l;
            *right = r;
        }
        id
    }
}

impl DecisionTree {
    /// Grows a tree on every example, without a held-out split.
    pub fn fit(
        examples: &[(TweetFeatures, String)],
        target: Dimension,
        max_depth: usize,
        min_leaf: usize,
    ) -> Result<Self, ClassifyError> {
        if examples.is_empty() {
            return Err(ClassifyError::EmptyTrainingSet);
        }
        if min_leaf == 0 {
            return Err(ClassifyError::InvalidParams("min_leaf must be at least 1".into()));
        }
        let classes: Vec<String> =
            examples.iter().map(|(_, c)| c.clone()).collect::<BTreeSet<_>>().into_iter().collect();
        let rows: Vec<[f64; N_FEATURES]> = examples.iter().map(|(f, _)| f.to_vector()).collect();
        let labels: Vec<usize> = examples
            .iter()
            .map(|(_, c)| classes.binary_search(c).expect("class collected above"))
            .collect();
        let mut builder =
            Builder { rows: &rows, labels: &labels, classes: &classes, max_depth, min_leaf, nodes: Vec::new() };
        let mut idx: Vec<usize> = (0..examples.len()).collect();
        builder.build(&mut idx, 0);
        Ok(Self { target, nodes: builder.nodes })
    }

    fn leaf_for(&self, x: &[f64; N_FEATURES]) -> (&String, &BTreeMap<String, usize>) {
        let mut node = 0;
        loop {
            match &self.nodes[node] {
                TreeNode::Split { feature, threshold, left, right } => {
                    node = if x[*feature] <= *threshold { *left } else { *right };
                }
                TreeNode::Leaf { class, histogram } => return (class, histogram),
            }
        }
    }

    /// Predicted class and its share of the leaf's training examples.
    pub fn predict(&self, features: &TweetFeatures) -> (String, f64) {
        let (class, histogram) = self.leaf_for(&features.to_vector());
        let total: usize = histogram.values().sum();
        let hits = histogram.get(class).copied().unwrap_or(0);
        (class.clone(), hits as f64 / total as f64)
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], i: usize) -> usize {
            match &nodes[i] {
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
                TreeNode::Leaf { .. } => 0,
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, TreeNode::Leaf { .. })).count()
    }

    /// Checks structural invariants; used after deserialisation.
    pub fn validate(&self) -> Result<(), ClassifyError> {
        let bad = |m: String| Err(ClassifyError::MalformedTree(m));
        if self.nodes.is_empty() {
            return bad("tree has no nodes".into());
        }
        let mut parents = vec![0usize; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            match node {
                TreeNode::Split { feature, threshold, left, right } => {
                    if *feature >= N_FEATURES {
                        return bad(format!("node {i}: feature index {feature} out of range"));
                    }
                    if !threshold.is_finite() {
                        return bad(format!("node {i}: non-finite threshold"));
                    }
                    for &child in [left, right] {
                        if child <= i || child >= self.nodes.len() {
                            return bad(format!("node {i}: child index {child} invalid"));
                        }
                        parents[child] += 1;
                    }
                }
                TreeNode::Leaf { class, histogram } => {
                    if histogram.values().sum::<usize>() == 0 {
                        return bad(format!("node {i}: empty histogram"));
                    }
                    if !histogram.contains_key(class) {
                        return bad(format!("node {i}: class '{class}' missing from histogram"));
                    }
                }
            }
        }
        if let Some(i) = (1..self.nodes.len()).find(|&i| parents[i] != 1) {
            return bad(format!("node {i} has {} parents", parents[i]));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tree serialises")
    }

    pub fn from_json(text: &str) -> Result<Self, ClassifyError> {
        let tree: Self = serde_json::from_str(text).map_err(|e| ClassifyError::MalformedTree(e.to_string()))?;
        tree.validate()?;
        Ok(tree)
    }

    /// Root-to-leaf paths rendered as readable rules.
    pub fn rules(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut stack = vec![(0usize, Vec::<String>::new())];
        while let Some((i, conds)) = stack.pop() {
            match &self.nodes[i] {
                TreeNode::Split { feature, threshold, left, right } => {
                    let name = FEATURE_NAMES[*feature];
                    let mut r = conds.clone();
                    r.push(format!("{name} > {threshold}"));
                    stack.push((*right, r));
                    let mut l = conds;
                    l.push(format!("{name} <= {threshold}"));
                    stack.push((*left, l));
                }
                TreeNode::Leaf { class, histogram } => {
                    let total: usize = histogram.values().sum();
                    let lhs = if conds.is_empty() { "always".to_string() } else { conds.join(" and ") };
                    out.push(format!("{lhs} => {class} ({}/{total})", histogram[class]));
                }
            }
        }
        out
    }
}

/// Seeded shuffle, 80/20 prefix split, fit on the training part and score
/// on the held-out part.
pub fn train_tree(
    examples: &[(TweetFeatures, String)],
    target: Dimension,
    params: &TreeParams,
) -> Result<(DecisionTree, TrainReport), ClassifyError> {
    if examples.is_empty() {
        return Err(ClassifyError::EmptyTrainingSet);
    }
    if params.min_leaf == 0 {
        return Err(ClassifyError::InvalidParams("min_leaf must be at least 1".into()));
    }
    if examples.len() < 2 * params.min_leaf {
        return Err(ClassifyError::InvalidParams(format!(
            "{} examples is fewer than 2 * min_leaf = {}",
            examples.len(),
            2 * params.min_leaf
        )));
    }
    let n = examples.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut Pcg64::seed_from_u64(params.split_seed));
    let n_train = ((n as f64 * TRAIN_FRACTION).floor() as usize).clamp(1, n - 1);
    let train: Vec<(TweetFeatures, String)> = order[..n_train].iter().map(|&i| examples[i].clone()).collect();
    let tree = DecisionTree::fit(&train, target, params.max_depth, params.min_leaf)?;

    let mut per_class: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    let mut correct = 0;
    for &i in &order[n_train..] {
        let (features, truth) = &examples[i];
        let (pred, _) = tree.predict(features);
        let e = per_class.entry(truth.clone()).or_default();
        e.1 += 1;
        if &pred == truth {
            e.0 += 1;
            correct += 1;
        }
    }
    let n_test = n - n_train;
    let report = TrainReport {
        target,
        accuracy_overall: correct as f64 / n_test as f64,
        accuracy_per_class: per_class.into_iter().map(|(c, (h, t))| (c, h as f64 / t as f64)).collect(),
        split_seed: params.split_seed,
        n_train,
        n_test,
        depth: tree.depth(),
        n_leaves: tree.n_leaves(),
    };
    Ok((tree, report))
}
