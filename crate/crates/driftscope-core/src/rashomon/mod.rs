//! Intrinsic feature importance from bootstrapped near-optimal tree
//! ensembles with Shapley-style per-example attribution.
//!
//! Per model and example the attribution is an exact interventional Shapley
//! vector of the tree's class-1 probability ([`shapley`]). Per example, the
//! intrinsic importance averages those vectors over every member of every
//! bootstrap's near-optimal set ([`lifim`]); per dataset, over all examples
//! ([`gifim`]).

mod ensemble;
mod shapley;
pub mod tree;

pub use ensemble::{build_ensemble, BootstrapSet, EnsembleParams, RashomonEnsemble};
pub use shapley::{background_mean, shapley_enumeration, tree_shapley};
pub use tree::{fit_greedy_tree, random_tree, DecisionTree, Node};

use crate::dataset::{BinarizationScheme, NormalizationStats, TabularDataset};
use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RashomonError {
    #[error("dataset is not labeled")]
    UnlabeledDataset,
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("features are not binarized (values outside {{0, 1}})")]
    NotBinarized,
    #[error("background set is empty")]
    EmptyBackground,
    #[error("ensemble has no members")]
    EmptyEnsemble,
}

/// Who an importance vector attributes, and under which aggregation level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Provenance {
    /// Single model, single example.
    Lfim {
        bootstrap: Option<usize>,
        member: Option<usize>,
        example: Option<usize>,
    },
    /// Ensemble mean for one example.
    Lifim { example: Option<usize> },
    /// Dataset mean of per-example intrinsic importances.
    Gifim { dataset: Option<String> },
}

/// Per-feature attribution with provenance metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceVector {
    pub values: Vec<f64>,
    pub provenance: Provenance,
}

impl ImportanceVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn attributing_example(mut self, example: usize) -> Self {
        match &mut self.provenance {
            Provenance::Lfim { example: e, .. } | Provenance::Lifim { example: e } => {
                *e = Some(example);
            }
            Provenance::Gifim { .. } => {}
        }
        self
    }

    pub fn attributing_dataset(mut self, name: &str) -> Self {
        if let Provenance::Gifim { dataset } = &mut self.provenance {
            *dataset = Some(name.to_string());
        }
        self
    }

    /// CSV export: feature name, value, provenance.
    pub fn to_csv(&self, feature_names: &[String]) -> String {
        let tag = match &self.provenance {
            Provenance::Lfim { .. } => "lfim".to_string(),
            Provenance::Lifim { example } => match example {
                Some(e) => format!("lifim(example={e})"),
                None => "lifim".to_string(),
            },
            Provenance::Gifim { dataset } => match dataset {
                Some(d) => format!("gifim(dataset={d})"),
                None => "gifim".to_string(),
            },
        };
        let mut out = String::from("feature,value,provenance\n");
        for (name, value) in feature_names.iter().zip(&self.values) {
            let _ = writeln!(out, "{name},{value},{tag}");
        }
        out
    }
}

/// Shapley attribution of one tree's output at `x`: the LFIM.
pub fn lfim_tree_shapley(
    tree: &DecisionTree,
    x: &[f64],
    background: &[Vec<f64>],
) -> Result<ImportanceVector, RashomonError> {
    let values = tree_shapley(tree, x, background)?;
    Ok(ImportanceVector {
        values,
        provenance: Provenance::Lfim {
            bootstrap: None,
            member: None,
            example: None,
        },
    })
}

/// Local intrinsic importance: mean over bootstraps of the mean over each
/// bootstrap's members of the per-model attributions. A tree appearing in
/// several bootstraps contributes once per appearance.
pub fn lifim(
    ensemble: &RashomonEnsemble,
    x: &[f64],
    background: &[Vec<f64>],
) -> Result<ImportanceVector, RashomonError> {
    if ensemble.n_members() == 0 {
        return Err(RashomonError::EmptyEnsemble);
    }
    let m = ensemble.n_features();
    let mut acc = vec![0.0; m];
    let b = ensemble.bootstraps.len() as f64;
    for set in &ensemble.bootstraps {
        let member_weight = 1.0 / (b * set.members.len() as f64);
        for tree in &set.members {
            let phi = tree_shapley(tree, x, background)?;
            for (a, p) in acc.iter_mut().zip(&phi) {
                *a += member_weight * p;
            }
        }
    }
    Ok(ImportanceVector {
        values: acc,
        provenance: Provenance::Lifim { example: None },
    })
}

/// Global intrinsic importance: the mean LiFIM over all rows of `data`.
/// Rows are scored in parallel and reduced in row order, so the result does
/// not depend on thread count.
pub fn gifim(
    ensemble: &RashomonEnsemble,
    data: &TabularDataset,
    background: &[Vec<f64>],
) -> Result<ImportanceVector, RashomonError> {
    if data.n_rows() == 0 {
        return Err(RashomonError::EmptyDataset);
    }
    let per_row: Vec<Vec<f64>> = data
        .rows()
        .par_iter()
        .map(|row| lifim(ensemble, row, background).map(|iv| iv.values))
        .collect::<Result<_, _>>()?;
    let m = per_row[0].len();
    let mut acc = vec![0.0; m];
    for row in &per_row {
        for (a, v) in acc.iter_mut().zip(row) {
            *a += v;
        }
    }
    let n = per_row.len() as f64;
    for a in &mut acc {
        *a /= n;
    }
    Ok(ImportanceVector {
        values: acc,
        provenance: Provenance::Gifim { dataset: None },
    })
}

/// Seeded background sample for interventional Shapley: min(N, cap) distinct
/// rows of `data`, in ascending row order.
pub fn background_sample(data: &TabularDataset, cap: usize, seed: u64) -> Vec<Vec<f64>> {
    let n = data.n_rows();
    if n <= cap {
        return data.rows().to_vec();
    }
    let mut rng = crate::substream(seed, 0x6267);
    let mut chosen: Vec<usize> = sample(&mut rng, n, cap).into_vec();
    chosen.sort_unstable();
    chosen.iter().map(|&i| data.row(i).to_vec()).collect()
}

/// Sums attributions of derived indicator columns back onto their source
/// columns. `source_indices[k]` is the source column of binarized feature k
/// (see [`BinarizationScheme::source_indices`]); `n_source` is the original
/// column count.
pub fn aggregate_to_source(values: &[f64], source_indices: &[usize], n_source: usize) -> Vec<f64> {
    let mut out = vec![0.0; n_source];
    for (v, &src) in values.iter().zip(source_indices) {
        out[src] += v;
    }
    out
}

/// A LiFIM oracle over a pair of datasets, in the source feature space.
///
/// `lifim_d` attributes with respect to the first dataset's ensemble,
/// `lifim_dp` with respect to the second's. Inputs are normalized-space
/// feature vectors of length M (the source column count).
pub trait LifimPairProvider {
    fn n_source_features(&self) -> usize;
    fn lifim_d(&self, x: &[f64]) -> Result<Vec<f64>, RashomonError>;
    fn lifim_dp(&self, x: &[f64]) -> Result<Vec<f64>, RashomonError>;
}

/// [`LifimPairProvider`] backed by two fitted ensembles over a shared
/// binarization scheme. Normalized inputs are mapped back to raw units,
/// binarized, attributed, and the attributions are summed per source column.
pub struct RashomonPairProvider<'a> {
    pub schema: &'a TabularDataset,
    pub scheme: &'a BinarizationScheme,
    pub stats: &'a NormalizationStats,
    pub ensemble_d: &'a RashomonEnsemble,
    pub ensemble_dp: &'a RashomonEnsemble,
    pub background_d: Vec<Vec<f64>>,
    pub background_dp: Vec<Vec<f64>>,
}

impl RashomonPairProvider<'_> {
    fn attribute(
        &self,
        ensemble: &RashomonEnsemble,
        background: &[Vec<f64>],
        x: &[f64],
    ) -> Result<Vec<f64>, RashomonError> {
        let raw = crate::dataset::denormalize_vector(self.stats, x);
        let binarized = self.scheme.apply_row(self.schema.columns(), &raw);
        let iv = lifim(ensemble, &binarized, background)?;
        Ok(aggregate_to_source(
            &iv.values,
            &self.scheme.source_indices(self.schema.columns()),
            self.schema.n_features(),
        ))
    }
}

impl LifimPairProvider for RashomonPairProvider<'_> {
    fn n_source_features(&self) -> usize {
        self.schema.n_features()
    }

    fn lifim_d(&self, x: &[f64]) -> Result<Vec<f64>, RashomonError> {
        self.attribute(self.ensemble_d, &self.background_d, x)
    }

    fn lifim_dp(&self, x: &[f64]) -> Result<Vec<f64>, RashomonError> {
        self.attribute(self.ensemble_dp, &self.background_dp, x)
    }
}
