//! Percentile-grid prototypes for low-dimensional labeled data.
//!
//! The given percentiles of two chosen columns form a Cartesian grid of
//! candidate points; each point is labeled by routing it through a shallow
//! greedy decision tree fit on those two columns (majority vote in the
//! leaf). Remaining columns, if any, are pinned at their median so the
//! prototypes stay in the dataset's full feature space.

use super::{Prototype, PrototypeError, Provenance};
use crate::dataset::TabularDataset;
use crate::linalg::percentile;

/// Builds the percentile-grid prototypes. `percentiles` must lie in
/// (0, 100); the classic configuration is [10, 50, 90] over two columns,
/// giving nine prototypes.
pub fn percentile_grid_prototypes(
    data: &TabularDataset,
    columns: [&str; 2],
    percentiles: &[f64],
    label_tree_depth: usize,
) -> Result<Vec<Prototype>, PrototypeError> {
    if !data.is_labeled() {
        return Err(PrototypeError::UnlabeledDataset);
    }
    for p in percentiles {
        if !(*p > 0.0 && *p < 100.0) {
            return Err(PrototypeError::BadPercentile(*p));
        }
    }
    let col_a = data
        .column_index(columns[0])
        .ok_or_else(|| PrototypeError::UnknownColumn(columns[0].to_string()))?;
    let col_b = data
        .column_index(columns[1])
        .ok_or_else(|| PrototypeError::UnknownColumn(columns[1].to_string()))?;

    let values_a = data.column_values(col_a);
    let values_b = data.column_values(col_b);
    let grid_a: Vec<f64> = percentiles
        .iter()
        .map(|&p| percentile(&values_a, p))
        .collect();
    let grid_b: Vec<f64> = percentiles
        .iter()
        .map(|&p| percentile(&values_b, p))
        .collect();

    // Labeling tree over the two chosen columns.
    let pairs: Vec<[f64; 2]> = data.rows().iter().map(|r| [r[col_a], r[col_b]]).collect();
    let labels = data.labels().expect("checked above");
    let tree = GreedyTree::fit(&pairs, labels, label_tree_depth);

    // Columns other than the two chosen ones are pinned at their median.
    let medians: Vec<f64> = (0..data.n_features())
        .map(|j| percentile(&data.column_values(j), 50.0))
        .collect();

    let mut prototypes = Vec::with_capacity(grid_a.len() * grid_b.len());
    for &va in &grid_a {
        for &vb in &grid_b {
            let mut features = medians.clone();
            features[col_a] = va;
            features[col_b] = vb;
            let label = tree.predict(&[va, vb]);
            prototypes.push(Prototype {
                id: prototypes.len(),
                features,
                label: Some(label),
                provenance: Provenance::PercentileGrid,
            });
        }
    }
    Ok(prototypes)
}

/// Minimal greedy tree over two continuous features: midpoint-candidate
/// splits chosen by information gain, majority-vote leaves.
struct GreedyTree {
    root: GreedyNode,
}

enum GreedyNode {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: Box<GreedyNode>,
        right: Box<GreedyNode>,
    },
}

fn majority(labels: &[f64], idx: &[usize]) -> f64 {
    let ones = idx.iter().filter(|&&i| labels[i] == 1.0).count();
    // Ties to class 0 for determinism.
    f64::from(ones * 2 > idx.len())
}

fn entropy(ones: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let mut h = 0.0;
    for c in [ones, total - ones] {
        if c > 0 {
            let p = c as f64 / total as f64;
            h -= p * p.log2();
        }
    }
    h
}

impl GreedyTree {
    fn fit(points: &[[f64; 2]], labels: &[f64], depth: usize) -> Self {
        let idx: Vec<usize> = (0..points.len()).collect();
        Self {
            root: Self::grow(points, labels, idx, depth),
        }
    }

    #[allow(clippy::needless_range_loop)]
    fn grow(points: &[[f64; 2]], labels: &[f64], idx: Vec<usize>, depth: usize) -> GreedyNode {
        let ones = idx.iter().filter(|&&i| labels[i] == 1.0).count();
        if depth == 0 || ones == 0 || ones == idx.len() {
            return GreedyNode::Leaf(majority(labels, &idx));
        }
        let parent_h = entropy(ones, idx.len());
        let mut best: Option<(f64, usize, f64)> = None; // (gain, feature, threshold)
        for feature in 0..2 {
            let mut vals: Vec<f64> = idx.iter().map(|&i| points[i][feature]).collect();
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            vals.dedup();
            for w in vals.windows(2) {
                let t = (w[0] + w[1]) / 2.0;
                let left: Vec<usize> = idx
                    .iter()
                    .copied()
                    .filter(|&i| points[i][feature] <= t)
                    .collect();
                let l_ones = left.iter().filter(|&&i| labels[i] == 1.0).count();
                let r_total = idx.len() - left.len();
                let r_ones = ones - l_ones;
                let n = idx.len() as f64;
                let gain = parent_h
                    - (left.len() as f64 / n) * entropy(l_ones, left.len())
                    - (r_total as f64 / n) * entropy(r_ones, r_total);
                let better = match best {
                    None => true,
                    Some((g, f, bt)) => {
                        gain > g || (gain == g && (feature < f || (feature == f && t < bt)))
                    }
                };
                if better {
                    best = Some((gain, feature, t));
                }
            }
        }
        let Some((gain, feature, threshold)) = best else {
            return GreedyNode::Leaf(majority(labels, &idx));
        };
        if gain <= 0.0 {
            return GreedyNode::Leaf(majority(labels, &idx));
        }
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = idx
            .into_iter()
            .partition(|&i| points[i][feature] <= threshold);
        GreedyNode::Split {
            feature,
            threshold,
            left: Box::new(Self::grow(points, labels, left_idx, depth - 1)),
            right: Box::new(Self::grow(points, labels, right_idx, depth - 1)),
        }
    }

    fn predict(&self, x: &[f64; 2]) -> f64 {
        let mut node = &self.root;
        loop {
            match node {
                GreedyNode::Leaf(label) => return *label,
                GreedyNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature] <= *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }
}
