//! Bootstrapped near-optimal tree ensembles.
//!
//! For each seeded bootstrap a pool of diversified greedy trees is fit; all
//! candidates whose regularized loss on that bootstrap is within ε of the
//! pool's best are retained. This is a documented approximation of exact
//! near-optimal-set enumeration: the aggregation contract downstream (mean
//! over bootstraps, then over members) is unchanged, but membership comes
//! from a finite diversified pool rather than an exhaustive search.

use super::tree::{fit_greedy_tree, DecisionTree};
use super::RashomonError;
use crate::dataset::TabularDataset;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleParams {
    /// Number of bootstrap replicates (B).
    pub bootstraps: usize,
    /// Loss tolerance for membership (ε).
    pub epsilon: f64,
    pub depth: usize,
    pub lambda: f64,
    pub candidates_per_bootstrap: usize,
    /// Per-node feature-subsample fraction for the diversified candidates
    /// (candidate 0 always sees every feature).
    pub feature_subsample: f64,
    pub seed: u64,
}

impl Default for EnsembleParams {
    fn default() -> Self {
        Self {
            bootstraps: 10,
            epsilon: 0.02,
            depth: 3,
            lambda: 0.01,
            candidates_per_bootstrap: 5,
            feature_subsample: 0.7,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSet {
    /// Row indices sampled with replacement from the source dataset.
    pub indices: Vec<usize>,
    /// Best regularized loss among the candidate pool on this bootstrap.
    pub best_loss: f64,
    /// Candidates within ε of the best, in candidate order.
    pub members: Vec<DecisionTree>,
    /// Regularized losses of the members, aligned with `members`.
    pub member_losses: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RashomonEnsemble {
    pub bootstraps: Vec<BootstrapSet>,
    pub params: EnsembleParams,
}

impl RashomonEnsemble {
    pub fn n_members(&self) -> usize {
        self.bootstraps.iter().map(|b| b.members.len()).sum()
    }

    pub fn n_features(&self) -> usize {
        self.bootstraps
            .first()
            .and_then(|b| b.members.first())
            .map_or(0, |t| t.n_features)
    }

    /// JSON document with trees as nested node records.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "params": self.params,
            "bootstraps": self.bootstraps.iter().map(|b| serde_json::json!({
                "indices": b.indices,
                "best_loss": b.best_loss,
                "member_losses": b.member_losses,
                "members": b.members.iter().map(DecisionTree::to_nested_json).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Builds the bootstrap ensemble. Bootstraps are processed in parallel with
/// per-bootstrap seed substreams, so the result is independent of thread
/// count and bit-identical across runs.
pub fn build_ensemble(
    data: &TabularDataset,
    params: &EnsembleParams,
) -> Result<RashomonEnsemble, RashomonError> {
    assert!(params.bootstraps >= 1, "need at least one bootstrap");
    assert!(params.epsilon >= 0.0, "epsilon must be nonnegative");
    assert!(
        params.candidates_per_bootstrap >= 1,
        "need at least one candidate per bootstrap"
    );
    if data.n_rows() == 0 {
        return Err(RashomonError::EmptyDataset);
    }
    if !data.is_labeled() {
        return Err(RashomonError::UnlabeledDataset);
    }

    let bootstraps: Vec<BootstrapSet> = (0..params.bootstraps)
        .into_par_iter()
        .map(|i| build_bootstrap(data, params, i))
        .collect::<Result<_, _>>()?;

    Ok(RashomonEnsemble {
        bootstraps,
        params: params.clone(),
    })
}

fn build_bootstrap(
    data: &TabularDataset,
    params: &EnsembleParams,
    bootstrap_id: usize,
) -> Result<BootstrapSet, RashomonError> {
    let n = data.n_rows();
    let mut rng = crate::substream(params.seed, 0x626f_6f74 ^ bootstrap_id as u64);
    let indices: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
    let boot = data.subset(&indices);

    let mut candidates = Vec::with_capacity(params.candidates_per_bootstrap);
    for c in 0..params.candidates_per_bootstrap {
        let subsample = if c == 0 {
            1.0
        } else {
            params.feature_subsample
        };
        let tree_seed = params
            .seed
            .wrapping_mul(0x100_0001)
            .wrapping_add((bootstrap_id as u64) << 20)
            .wrapping_add(c as u64);
        let tree = fit_greedy_tree(&boot, params.depth, params.lambda, tree_seed, subsample)?;
        let loss = tree.regularized_loss(&boot, params.lambda)?;
        candidates.push((tree, loss));
    }
    let best_loss = candidates
        .iter()
        .map(|(_, l)| *l)
        .fold(f64::INFINITY, f64::min);
    let mut members = Vec::new();
    let mut member_losses = Vec::new();
    for (tree, loss) in candidates {
        if loss <= best_loss + params.epsilon {
            members.push(tree);
            member_losses.push(loss);
        }
    }
    Ok(BootstrapSet {
        indices,
        best_loss,
        members,
        member_losses,
    })
}
