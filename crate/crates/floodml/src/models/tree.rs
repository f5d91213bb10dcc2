//! Decision tree classifier with greedy entropy-based binary splitting.
//!
//! Candidate thresholds sit at midpoints between consecutive distinct sorted
//! feature values. Splits maximize information gain (size-weighted child
//! entropies by default), ties going to the lower feature index and then the
//! lower threshold. Values route left when `value <= threshold`.

use serde::{Deserialize, Serialize};

use super::{validate_training_input, ModelError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeConfig {
    pub max_depth: usize,
    /// Nodes with fewer samples than this become leaves.
    pub min_samples: usize,
    /// Splits whose gain falls below this are rejected.
    pub min_gain: f64,
    /// When false, child entropies enter the gain unweighted. The weighted
    /// form is the default; the unweighted variant exists for comparison
    /// experiments only.
    pub weighted_gain: bool,
}

impl Default for TreeConfig {
    fn default() -> Self {
        Self { max_depth: 8, min_samples: 2, min_gain: 1e-7, weighted_gain: true }
    }
}

/// Internal decision node or class-frequency leaf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Internal {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        class: u8,
        /// Training-sample counts per class at this leaf.
        counts: [usize; 2],
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub root: TreeNode,
    pub max_depth: usize,
    pub min_samples: usize,
    pub min_gain: f64,
    pub n_features: usize,
}

/// Shannon entropy (base 2) of the empirical class distribution.
pub fn entropy(labels: &[u8]) -> Result<f64, ModelError> {
    if labels.is_empty() {
        return Err(ModelError::EmptyTrainingSet);
    }
    let ones = labels.iter().filter(|&&y| y == 1).count();
    if labels.iter().any(|&y| y > 1) {
        return Err(ModelError::NonBinaryLabel(2));
    }
    Ok(entropy_from_counts(labels.len() - ones, ones))
}

fn entropy_from_counts(zeros: usize, ones: usize) -> f64 {
    let total = (zeros + ones) as f64;
    let mut h = 0.0;
    for count in [zeros, ones] {
        if count > 0 {
            let p = count as f64 / total;
            h -= p * p.log2();
        }
    }
    h
}

/// Parent entropy minus the (size-weighted) sum of partition entropies.
/// The partitions must contain exactly the parent labels as a multiset.
pub fn information_gain(
    parent: &[u8],
    partitions: &[&[u8]],
    weighted: bool,
) -> Result<f64, ModelError> {
    let parent_entropy = entropy(parent)?;
    let parent_ones = parent.iter().filter(|&&y| y == 1).count();
    let mut seen = 0usize;
    let mut seen_ones = 0usize;
    let mut children = 0.0;
    for part in partitions {
        let h = entropy(part)?;
        seen += part.len();
        seen_ones += part.iter().filter(|&&y| y == 1).count();
        let weight = if weighted {
            part.len() as f64 / parent.len() as f64
        } else {
            1.0
        };
        children += weight * h;
    }
    if seen != parent.len() || seen_ones != parent_ones {
        return Err(ModelError::InvalidHyperparameter(format!(
            "partitions do not partition the parent: {seen} labels with {seen_ones} ones vs {} with {parent_ones}",
            parent.len()
        )));
    }
    Ok(parent_entropy - children)
}

fn gain_from_counts(
    parent: (usize, usize),
    left: (usize, usize),
    right: (usize, usize),
    weighted: bool,
) -> f64 {
    let total = (parent.0 + parent.1) as f64;
    let left_n = (left.0 + left.1) as f64;
    let right_n = (right.0 + right.1) as f64;
    let (wl, wr) = if weighted {
        (left_n / total, right_n / total)
    } else {
        (1.0, 1.0)
    };
    entropy_from_counts(parent.0, parent.1)
        - wl * entropy_from_counts(left.0, left.1)
        - wr * entropy_from_counts(right.0, right.1)
}

struct Builder<'a> {
    features: &'a [Vec<f64>],
    labels: &'a [u8],
    config: &'a TreeConfig,
    n_features: usize,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl<'a> Builder<'a> {
    fn counts(&self, rows: &[usize]) -> [usize; 2] {
        let ones = rows.iter().filter(|&&r| self.labels[r] == 1).count();
        [rows.len() - ones, ones]
    }

    fn leaf(&self, rows: &[usize]) -> TreeNode {
        let counts = self.counts(rows);
        // majority class, exact tie -> 0
        let class = u8::from(counts[1] > counts[0]);
        TreeNode::Leaf { class, counts: [counts[0], counts[1]] }
    }

    fn best_split(&self, rows: &[usize]) -> Option<BestSplit> {
        let parent = self.counts(rows);
        let mut best: Option<BestSplit> = None;
        let mut order = rows.to_vec();
        for feature in 0..self.n_features {
            order.sort_by(|&a, &b| self.features[a][feature].total_cmp(&self.features[b][feature]));
            let mut left = (0usize, 0usize);
            for w in 0..order.len() - 1 {
                let row = order[w];
                if self.labels[row] == 1 {
                    left.1 += 1;
                } else {
                    left.0 += 1;
                }
                let value = self.features[row][feature];
                let next = self.features[order[w + 1]][feature];
                if value == next {
                    continue;
                }
                let threshold = value + (next - value) / 2.0;
                let right = (parent[0] - left.0, parent[1] - left.1);
                let gain =
                    gain_from_counts((parent[0], parent[1]), left, right, self.config.weighted_gain);
                // strict improvement keeps the lowest feature, then the
                // lowest threshold, on gain ties
                if best.as_ref().is_none_or(|b| gain > b.gain) {
                    best = Some(BestSplit { feature, threshold, gain });
                }
            }
        }
        best
    }

    fn build(&self, rows: &[usize], depth: usize) -> TreeNode {
        let counts = self.counts(rows);
        let pure = counts[0] == 0 || counts[1] == 0;
        if pure || depth >= self.config.max_depth || rows.len() < self.config.min_samples {
            return self.leaf(rows);
        }
        let Some(split) = self.best_split(rows) else {
            return self.leaf(rows);
        };
        if split.gain < self.config.min_gain {
            return self.leaf(rows);
        }
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&r| self.features[r][split.feature] <= split.threshold);
        TreeNode::Internal {
            feature: split.feature,
            threshold: split.threshold,
            left: Box::new(self.build(&left_rows, depth + 1)),
            right: Box::new(self.build(&right_rows, depth + 1)),
        }
    }
}

/// Grow a tree by greedy recursive binary splitting.
pub fn fit_tree(
    features: &[Vec<f64>],
    labels: &[u8],
    config: &TreeConfig,
) -> Result<TreeModel, ModelError> {
    let n_features = validate_training_input(features, labels)?;
    if config.min_gain < 0.0 {
        return Err(ModelError::InvalidHyperparameter(format!(
            "min gain {} must be non-negative",
            config.min_gain
        )));
    }
    let builder = Builder { features, labels, config, n_features };
    let rows: Vec<usize> = (0..features.len()).collect();
    Ok(TreeModel {
        root: builder.build(&rows, 0),
        max_depth: config.max_depth,
        min_samples: config.min_samples,
        min_gain: config.min_gain,
        n_features,
    })
}

impl TreeModel {
    /// Route to a leaf; returns its class and positive-class frequency.
    pub fn predict_with_score(&self, features: &[f64]) -> Result<(u8, f64), ModelError> {
        if features.len() != self.n_features {
            return Err(ModelError::DimensionMismatch {
                expected: self.n_features,
                got: features.len(),
            });
        }
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Internal { feature, threshold, left, right } => {
                    node = if features[*feature] <= *threshold { left } else { right };
                }
                TreeNode::Leaf { class, counts } => {
                    let total = counts[0] + counts[1];
                    let score = if total == 0 {
                        0.0
                    } else {
                        counts[1] as f64 / total as f64
                    };
                    return Ok((*class, score));
                }
            }
        }
    }

    pub fn node_count(&self) -> usize {
        fn walk(node: &TreeNode) -> usize {
            match node {
                TreeNode::Leaf { .. } => 1,
                TreeNode::Internal { left, right, .. } => 1 + walk(left) + walk(right),
            }
        }
        walk(&self.root)
    }

    pub fn depth(&self) -> usize {
        fn walk(node: &TreeNode) -> usize {
            match node {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Internal { left, right, .. } => 1 + walk(left).max(walk(right)),
            }
        }
        walk(&self.root)
    }
}
