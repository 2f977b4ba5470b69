//! Prototype-based dataset comparison.
//!
//! A prototype set summarizes the reference dataset; every sample of both
//! datasets is assigned to its nearest prototype, and the per-prototype
//! differences in neighbour proportion (NSPD) and mean neighbour distance
//! (NSDD) localize where the datasets diverge. Partial prototypes restrict a
//! prototype to the K features that are most value-stable and most rank-
//! stable in its neighbourhood.

mod grid;
mod kmeans;
mod neighbourhood;
mod partial;

pub use grid::percentile_grid_prototypes;
pub use kmeans::kmeans_prototypes;
pub use neighbourhood::{
    delta_neighbourhood, neighbourhood_stats, neighbourhood_stats_opts, DeltaSpec,
    NeighbourhoodOptions, NeighbourhoodStats, PrototypeNeighbourhood,
};
pub use partial::{
    feature_score, partial_prototypes, PartialParams, PartialPrototype, SelectedFeature,
};

use crate::dataset::DatasetError;
use crate::rashomon::RashomonError;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PrototypeError {
    #[error("k = {k} exceeds the {n} available rows")]
    TooFewRows { k: usize, n: usize },
    #[error("dataset is not labeled")]
    UnlabeledDataset,
    #[error("column \"{0}\" not found")]
    UnknownColumn(String),
    #[error("prototype set is empty")]
    EmptyPrototypeSet,
    #[error("feature index {index} out of range for {len} features")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("K = {k} exceeds the {m} available features")]
    KTooLarge { k: usize, m: usize },
    #[error("rank terms require an importance provider (set c1 = c2 = 0 to go without)")]
    MissingImportanceProvider,
    #[error("percentile {0} outside (0, 100)")]
    BadPercentile(f64),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Rashomon(#[from] RashomonError),
}

/// How a prototype was constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Kmeans,
    PercentileGrid,
    Manual,
}

/// A representative point in the (normalized) feature space of the reference
/// dataset, with an optional label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prototype {
    pub id: usize,
    pub features: Vec<f64>,
    pub label: Option<f64>,
    pub provenance: Provenance,
}

impl Prototype {
    /// The vector used for distance computation: features, plus the label as
    /// one appended slot when label-aware distance is enabled.
    pub fn distance_vector(&self, label_aware: bool) -> Vec<f64> {
        let mut v = self.features.clone();
        if label_aware {
            v.push(self.label.unwrap_or(0.0));
        }
        v
    }

    /// JSON record: {id, provenance, features: {name: value}, label}.
    pub fn to_json(&self, feature_names: &[String]) -> serde_json::Value {
        let features: BTreeMap<&str, f64> = feature_names
            .iter()
            .map(String::as_str)
            .zip(self.features.iter().copied())
            .collect();
        serde_json::json!({
            "id": self.id,
            "provenance": self.provenance,
            "features": features,
            "label": self.label,
        })
    }
}

/// Serializes a prototype list to the documented JSON document.
pub fn prototypes_to_json(prototypes: &[Prototype], feature_names: &[String]) -> serde_json::Value {
    serde_json::Value::Array(
        prototypes
            .iter()
            .map(|p| p.to_json(feature_names))
            .collect(),
    )
}
