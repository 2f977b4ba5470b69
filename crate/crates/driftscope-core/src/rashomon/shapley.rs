//! Exact interventional Shapley values for decision trees.
//!
//! The value of a coalition S is the mean tree output over background rows
//! with the features in S overridden by the explained example's values. Two
//! routes compute the same quantity:
//!
//! - [`tree_shapley`]: a polynomial path-weighting walk. For each background
//!   row, a path is live only if every split either agrees for both rows or
//!   is pinned to the example's side (feature in the coalition) or the
//!   background's side (feature out). A leaf reached with `p` pinned-in and
//!   `n` pinned-out features contributes Beta-function weights
//!   (p−1)! n! / (p+n)! to each pinned-in feature and −p! (n−1)! / (p+n)! to
//!   each pinned-out feature.
//! - [`shapley_enumeration`]: brute force over all 2^M coalitions, the
//!   validation oracle.
//!
//! Both satisfy efficiency: Σ_j φ_j = f(x) − mean background output.

use super::tree::{DecisionTree, Node};
use super::RashomonError;

/// Factorials 0..=n as f64; path lengths are bounded by tree depth, so this
/// stays far below f64 overflow.
fn factorials(n: usize) -> Vec<f64> {
    let mut f = vec![1.0; n + 1];
    for i in 1..=n {
        f[i] = f[i - 1] * i as f64;
    }
    f
}

enum Pin {
    /// Only the example's value follows the path (feature must be in S).
    In(usize),
    /// Only the background value follows the path (feature must be out of S).
    Out(usize),
}

#[allow(clippy::too_many_arguments)]
fn walk(
    tree: &DecisionTree,
    node: usize,
    x: &[f64],
    z: &[f64],
    pins: &mut Vec<Pin>,
    n_in: usize,
    n_out: usize,
    fact: &[f64],
    phi: &mut [f64],
) {
    match &tree.nodes[node] {
        Node::Leaf { counts, .. } => {
            let total = counts.0 + counts.1;
            let value = if total == 0 {
                0.5
            } else {
                counts.1 as f64 / total as f64
            };
            if n_in > 0 {
                let w = fact[n_in - 1] * fact[n_out] / fact[n_in + n_out];
                for pin in pins.iter() {
                    if let Pin::In(j) = pin {
                        phi[*j] += value * w;
                    }
                }
            }
            if n_out > 0 {
                let w = fact[n_in] * fact[n_out - 1] / fact[n_in + n_out];
                for pin in pins.iter() {
                    if let Pin::Out(j) = pin {
                        phi[*j] -= value * w;
                    }
                }
            }
        }
        Node::Split {
            feature,
            left,
            right,
        } => {
            let x_child = if x[*feature] <= 0.5 { *left } else { *right };
            let z_child = if z[*feature] <= 0.5 { *left } else { *right };
            if x_child == z_child {
                walk(tree, x_child, x, z, pins, n_in, n_out, fact, phi);
            } else {
                pins.push(Pin::In(*feature));
                walk(tree, x_child, x, z, pins, n_in + 1, n_out, fact, phi);
                pins.pop();
                pins.push(Pin::Out(*feature));
                walk(tree, z_child, x, z, pins, n_in, n_out + 1, fact, phi);
                pins.pop();
            }
        }
    }
}

/// Polynomial-route Shapley values of the tree's class-1 probability at `x`
/// with an interventional background.
pub fn tree_shapley(
    tree: &DecisionTree,
    x: &[f64],
    background: &[Vec<f64>],
) -> Result<Vec<f64>, RashomonError> {
    if background.is_empty() {
        return Err(RashomonError::EmptyBackground);
    }
    let m = tree.n_features;
    let fact = factorials(tree.depth() + 1);
    let mut phi = vec![0.0; m];
    let mut pins = Vec::new();
    for z in background {
        walk(tree, 0, x, z, &mut pins, 0, 0, &fact, &mut phi);
    }
    let scale = 1.0 / background.len() as f64;
    for v in &mut phi {
        *v *= scale;
    }
    Ok(phi)
}

/// Brute-force Shapley values by enumerating all 2^M coalitions. Exact but
/// exponential; this is the reference route for validating [`tree_shapley`].
pub fn shapley_enumeration(
    tree: &DecisionTree,
    x: &[f64],
    background: &[Vec<f64>],
) -> Result<Vec<f64>, RashomonError> {
    if background.is_empty() {
        return Err(RashomonError::EmptyBackground);
    }
    let m = tree.n_features;
    assert!(m <= 20, "enumeration route is for small feature counts");
    let fact = factorials(m);
    let n_masks = 1usize << m;

    // v(S): mean output over background rows with features in S set to x.
    let mut coalition_value = vec![0.0; n_masks];
    let mut hybrid = vec![0.0; m];
    for (mask, slot) in coalition_value.iter_mut().enumerate() {
        let mut acc = 0.0;
        for z in background {
            for j in 0..m {
                hybrid[j] = if mask & (1 << j) != 0 { x[j] } else { z[j] };
            }
            acc += tree.predict_proba(&hybrid);
        }
        *slot = acc / background.len() as f64;
    }

    let mut phi = vec![0.0; m];
    for (j, phi_j) in phi.iter_mut().enumerate() {
        let bit = 1usize << j;
        for mask in 0..n_masks {
            if mask & bit != 0 {
                continue;
            }
            let s = (mask as u32).count_ones() as usize;
            let weight = fact[s] * fact[m - s - 1] / fact[m];
            *phi_j += weight * (coalition_value[mask | bit] - coalition_value[mask]);
        }
    }
    Ok(phi)
}

/// Mean tree output over the background rows; the Shapley baseline.
pub fn background_mean(tree: &DecisionTree, background: &[Vec<f64>]) -> f64 {
    background
        .iter()
        .map(|z| tree.predict_proba(z))
        .sum::<f64>()
        / background.len() as f64
}
