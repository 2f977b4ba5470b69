//! Depth-limited greedy decision trees over binarized features.
//!
//! Trees are grown by information gain and then pruned bottom-up: any
//! subtree that does not reduce the regularized loss (misclassification
//! rate plus a per-leaf penalty) relative to collapsing it into a leaf is
//! collapsed. Seeded per-node feature subsampling produces diversified
//! candidates for the near-optimal ensembles.

use super::RashomonError;
use crate::dataset::TabularDataset;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    /// `left` when the feature value is 0, `right` when it is 1.
    Split {
        feature: usize,
        left: usize,
        right: usize,
    },
    Leaf {
        class: u8,
        /// Training label counts (class 0, class 1) that reached this leaf.
        counts: (usize, usize),
        /// Fraction of the training set that reached this leaf.
        fraction: f64,
    },
}

/// A binary decision tree over indicator features. Every root-to-leaf path
/// tests distinct features; leaf fractions sum to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
    pub n_features: usize,
    pub depth_limit: usize,
    pub lambda: f64,
}

impl DecisionTree {
    /// Class-1 probability at the leaf reached by `x` (the leaf's class-1
    /// training fraction). This continuous output is the attribution target.
    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        let mut node = 0;
        loop {
            match &self.nodes[node] {
                Node::Split {
                    feature,
                    left,
                    right,
                } => {
                    node = if x[*feature] <= 0.5 { *left } else { *right };
                }
                Node::Leaf { counts, .. } => {
                    let total = counts.0 + counts.1;
                    return if total == 0 {
                        0.5
                    } else {
                        counts.1 as f64 / total as f64
                    };
                }
            }
        }
    }

    pub fn predict_class(&self, x: &[f64]) -> u8 {
        let mut node = 0;
        loop {
            match &self.nodes[node] {
                Node::Split {
                    feature,
                    left,
                    right,
                } => {
                    node = if x[*feature] <= 0.5 { *left } else { *right };
                }
                Node::Leaf { class, .. } => return *class,
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    pub fn depth(&self) -> usize {
        fn rec(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + rec(nodes, *left).max(rec(nodes, *right)),
            }
        }
        rec(&self.nodes, 0)
    }

    pub fn error_rate(&self, data: &TabularDataset) -> Result<f64, RashomonError> {
        let labels = data.labels().ok_or(RashomonError::UnlabeledDataset)?;
        if data.n_rows() == 0 {
            return Ok(0.0);
        }
        let wrong = data
            .rows()
            .iter()
            .zip(labels)
            .filter(|(row, &y)| f64::from(self.predict_class(row)) != y)
            .count();
        Ok(wrong as f64 / data.n_rows() as f64)
    }

    /// Misclassification rate + λ · #leaves.
    pub fn regularized_loss(
        &self,
        data: &TabularDataset,
        lambda: f64,
    ) -> Result<f64, RashomonError> {
        Ok(self.error_rate(data)? + lambda * self.n_leaves() as f64)
    }

    /// Nested-record JSON form (splits carry their children inline).
    pub fn to_nested_json(&self) -> serde_json::Value {
        fn rec(nodes: &[Node], i: usize) -> serde_json::Value {
            match &nodes[i] {
                Node::Leaf {
                    class,
                    counts,
                    fraction,
                } => serde_json::json!({
                    "leaf": { "class": class, "counts": [counts.0, counts.1], "fraction": fraction }
                }),
                Node::Split {
                    feature,
                    left,
                    right,
                } => serde_json::json!({
                    "split": {
                        "feature": feature,
                        "left": rec(nodes, *left),
                        "right": rec(nodes, *right),
                    }
                }),
            }
        }
        serde_json::json!({
            "n_features": self.n_features,
            "depth_limit": self.depth_limit,
            "lambda": self.lambda,
            "root": rec(&self.nodes, 0),
        })
    }
}

/// Intermediate recursive form used while growing and pruning.
enum Build {
    Leaf {
        class: u8,
        counts: (usize, usize),
        n_rows: usize,
    },
    Split {
        feature: usize,
        left: Box<Build>,
        right: Box<Build>,
    },
}

struct Grower<'a> {
    rows: &'a [Vec<f64>],
    labels: &'a [f64],
    n_total: usize,
    feature_subsample: f64,
    rng: ChaCha8Rng,
}

fn label_counts(labels: &[f64], idx: &[usize]) -> (usize, usize) {
    let ones = idx.iter().filter(|&&i| labels[i] == 1.0).count();
    (idx.len() - ones, ones)
}

fn entropy_counts(c0: usize, c1: usize) -> f64 {
    let n = (c0 + c1) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let mut h = 0.0;
    for c in [c0, c1] {
        if c > 0 {
            let p = c as f64 / n;
            h -= p * p.log2();
        }
    }
    h
}

impl Grower<'_> {
    fn leaf(&self, idx: &[usize]) -> Build {
        let counts = label_counts(self.labels, idx);
        // Majority vote; ties go to class 0 for determinism.
        let class = u8::from(counts.1 > counts.0);
        Build::Leaf {
            class,
            counts,
            n_rows: idx.len(),
        }
    }

    fn grow(&mut self, idx: Vec<usize>, depth_left: usize, used: &mut Vec<bool>) -> Build {
        let counts = label_counts(self.labels, &idx);
        if depth_left == 0 || counts.0 == 0 || counts.1 == 0 {
            return self.leaf(&idx);
        }
        // Candidates: unused on this path and non-constant within the node.
        let mut candidates: Vec<usize> = (0..used.len())
            .filter(|&j| !used[j])
            .filter(|&j| {
                let first = self.rows[idx[0]][j];
                idx.iter().any(|&i| self.rows[i][j] != first)
            })
            .collect();
        if candidates.is_empty() {
            return self.leaf(&idx);
        }
        if self.feature_subsample < 1.0 {
            let keep = ((candidates.len() as f64 * self.feature_subsample).ceil() as usize).max(1);
            candidates.shuffle(&mut self.rng);
            candidates.truncate(keep);
            candidates.sort_unstable();
        }

        let parent_h = entropy_counts(counts.0, counts.1);
        let mut best: Option<(f64, usize)> = None;
        for &j in &candidates {
            let left_idx: Vec<usize> = idx
                .iter()
                .copied()
                .filter(|&i| self.rows[i][j] <= 0.5)
                .collect();
            if left_idx.is_empty() || left_idx.len() == idx.len() {
                continue;
            }
            let (l0, l1) = label_counts(self.labels, &left_idx);
            let r0 = counts.0 - l0;
            let r1 = counts.1 - l1;
            let n = idx.len() as f64;
            let gain = parent_h
                - (left_idx.len() as f64 / n) * entropy_counts(l0, l1)
                - ((idx.len() - left_idx.len()) as f64 / n) * entropy_counts(r0, r1);
            // Higher gain wins; ties toward the lower feature index (the
            // candidate list is ascending, so strict improvement only).
            if best.is_none_or(|(g, _)| gain > g) {
                best = Some((gain, j));
            }
        }
        let Some((_, feature)) = best else {
            return self.leaf(&idx);
        };

        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) =
            idx.into_iter().partition(|&i| self.rows[i][feature] <= 0.5);
        used[feature] = true;
        let left = self.grow(left_idx, depth_left - 1, used);
        let right = self.grow(right_idx, depth_left - 1, used);
        used[feature] = false;
        Build::Split {
            feature,
            left: Box::new(left),
            right: Box::new(right),
        }
    }
}

/// Bottom-up prune: collapse any subtree whose regularized loss is not
/// strictly better than predicting the subtree's majority class.
/// Returns (possibly collapsed node, #leaves, #misclassified, counts).
fn prune(node: Build, lambda: f64, n_total: usize) -> (Build, usize, usize, (usize, usize)) {
    match node {
        Build::Leaf {
            class,
            counts,
            n_rows,
        } => {
            let wrong = if class == 1 { counts.0 } else { counts.1 };
            let _ = n_rows;
            (
                Build::Leaf {
                    class,
                    counts,
                    n_rows,
                },
                1,
                wrong,
                counts,
            )
        }
        Build::Split {
            feature,
            left,
            right,
        } => {
            let (left, l_leaves, l_wrong, l_counts) = prune(*left, lambda, n_total);
            let (right, r_leaves, r_wrong, r_counts) = prune(*right, lambda, n_total);
            let counts = (l_counts.0 + r_counts.0, l_counts.1 + r_counts.1);
            let sub_leaves = l_leaves + r_leaves;
            let sub_wrong = l_wrong + r_wrong;
            let class = u8::from(counts.1 > counts.0);
            let leaf_wrong = if class == 1 { counts.0 } else { counts.1 };
            let nt = n_total as f64;
            let leaf_loss = leaf_wrong as f64 / nt + lambda;
            let sub_loss = sub_wrong as f64 / nt + lambda * sub_leaves as f64;
            if leaf_loss <= sub_loss {
                let n_rows = counts.0 + counts.1;
                (
                    Build::Leaf {
                        class,
                        counts,
                        n_rows,
                    },
                    1,
                    leaf_wrong,
                    counts,
                )
            } else {
                (
                    Build::Split {
                        feature,
                        left: Box::new(left),
                        right: Box::new(right),
                    },
                    sub_leaves,
                    sub_wrong,
                    counts,
                )
            }
        }
    }
}

fn flatten(build: Build, n_total: usize, nodes: &mut Vec<Node>) -> usize {
    match build {
        Build::Leaf {
            class,
            counts,
            n_rows,
        } => {
            nodes.push(Node::Leaf {
                class,
                counts,
                fraction: n_rows as f64 / n_total as f64,
            });
            nodes.len() - 1
        }
        Build::Split {
            feature,
            left,
            right,
        } => {
            let slot = nodes.len();
            nodes.push(Node::Split {
                feature,
                left: 0,
                right: 0,
            });
            let l = flatten(*left, n_total, nodes);
            let r = flatten(*right, n_total, nodes);
            if let Node::Split { left, right, .. } = &mut nodes[slot] {
                *left = l;
                *right = r;
            }
            slot
        }
    }
}

/// Fits a greedy information-gain tree on a labeled, binarized dataset, then
/// prunes it against the regularized loss. `feature_subsample < 1` draws a
/// seeded per-node candidate subset, which is how ensemble candidates are
/// diversified.
pub fn fit_greedy_tree(
    data: &TabularDataset,
    depth: usize,
    lambda: f64,
    seed: u64,
    feature_subsample: f64,
) -> Result<DecisionTree, RashomonError> {
    let labels = data.labels().ok_or(RashomonError::UnlabeledDataset)?;
    if data.n_rows() == 0 {
        return Err(RashomonError::EmptyDataset);
    }
    if data
        .rows()
        .iter()
        .any(|row| row.iter().any(|v| *v != 0.0 && *v != 1.0))
    {
        return Err(RashomonError::NotBinarized);
    }
    assert!(
        (0.0..=1.0).contains(&feature_subsample) && feature_subsample > 0.0,
        "feature_subsample must be in (0, 1]"
    );
    let mut grower = Grower {
        rows: data.rows(),
        labels,
        n_total: data.n_rows(),
        feature_subsample,
        rng: crate::substream(seed, 0x72_6565),
    };
    let mut used = vec![false; data.n_features()];
    let built = grower.grow((0..data.n_rows()).collect(), depth, &mut used);
    let (pruned, _, _, _) = prune(built, lambda, grower.n_total);
    let mut nodes = Vec::new();
    flatten(pruned, data.n_rows(), &mut nodes);
    Ok(DecisionTree {
        nodes,
        n_features: data.n_features(),
        depth_limit: depth,
        lambda,
    })
}

/// Generates a random structurally-valid tree (distinct features per path,
/// random leaf class fractions). This is the validation corpus used to cross
/// check the two Shapley routes; it is not a fitted model.
pub fn random_tree(n_features: usize, max_depth: usize, rng: &mut ChaCha8Rng) -> DecisionTree {
    fn rec(
        nodes: &mut Vec<Node>,
        available: &mut Vec<usize>,
        depth_left: usize,
        rng: &mut ChaCha8Rng,
    ) -> usize {
        let make_leaf = depth_left == 0 || available.is_empty() || rng.random_bool(0.3);
        if make_leaf {
            let c1 = rng.random_range(0..=20usize);
            let c0 = rng.random_range(0..=20usize);
            let (c0, c1) = if c0 + c1 == 0 { (1, 1) } else { (c0, c1) };
            nodes.push(Node::Leaf {
                class: u8::from(c1 > c0),
                counts: (c0, c1),
                fraction: 0.0,
            });
            return nodes.len() - 1;
        }
        let pick = rng.random_range(0..available.len());
        let feature = available.swap_remove(pick);
        let slot = nodes.len();
        nodes.push(Node::Split {
            feature,
            left: 0,
            right: 0,
        });
        let l = rec(nodes, available, depth_left - 1, rng);
        let r = rec(nodes, available, depth_left - 1, rng);
        available.push(feature);
        if let Node::Split { left, right, .. } = &mut nodes[slot] {
            *left = l;
            *right = r;
        }
        slot
    }
    let mut nodes = Vec::new();
    let mut available: Vec<usize> = (0..n_features).collect();
    rec(&mut nodes, &mut available, max_depth, rng);
    DecisionTree {
        nodes,
        n_features,
        depth_limit: max_depth,
        lambda: 0.0,
    }
}
