//! Evaluation metrics, parameter sweeps, influence validation, and seeded
//! synthetic generators with ground truth.

mod influence_check;
mod metrics;
mod mixture;
mod sweeps;

pub use influence_check::{
    gen_planted_shift, removal_sweep, validate_influence, validate_influence_on, CorrelationReport,
    PlantedShiftPair, PlantedShiftSpec,
};
pub use metrics::{global_permutation_accuracy, pairwise_euclidean, random_triplet_accuracy};
pub use mixture::{gen_circle_mixture_pair, MixtureGroundTruth, MixturePairSpec, ProportionsMode};
pub use sweeps::{faithfulness_sweep, gen_sweep_corpus, tradeoff_sweep, Selection, SweepCorpus};

use crate::dataset::DatasetError;
use crate::influence::InfluenceError;
use crate::prototype::PrototypeError;
use crate::rashomon::RashomonError;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("need at least 3 items, got {0}")]
    TooFewItems(usize),
    #[error("arrays have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Prototype(#[from] PrototypeError),
    #[error(transparent)]
    Influence(#[from] InfluenceError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Rashomon(#[from] RashomonError),
}

/// One grid point of a sweep. Fields that do not apply to the sweep that
/// produced the record stay `None` and serialize to empty CSV cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub k: usize,
    pub seed: u64,
    pub selection: String,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub c3: Option<f64>,
    pub rta: Option<f64>,
    pub gpa: Option<f64>,
    pub value_variance: Option<f64>,
    pub mean_rank_difference: Option<f64>,
    pub mean_absolute_rank: Option<f64>,
    pub mean_value_deviation: Option<f64>,
}

impl SweepRecord {
    fn blank(k: usize, seed: u64, selection: &str) -> Self {
        Self {
            k,
            seed,
            selection: selection.to_string(),
            c1: None,
            c2: None,
            c3: None,
            rta: None,
            gpa: None,
            value_variance: None,
            mean_rank_difference: None,
            mean_absolute_rank: None,
            mean_value_deviation: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub records: Vec<SweepRecord>,
    pub seed: u64,
}

impl SweepResult {
    /// One CSV row per grid point.
    pub fn to_csv(&self) -> String {
        fn cell(v: Option<f64>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        let mut out = String::from(
            "k,seed,selection,c1,c2,c3,rta,gpa,value_variance,mean_rank_difference,mean_absolute_rank,mean_value_deviation\n",
        );
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.k,
                r.seed,
                r.selection,
                cell(r.c1),
                cell(r.c2),
                cell(r.c3),
                cell(r.rta),
                cell(r.gpa),
                cell(r.value_variance),
                cell(r.mean_rank_difference),
                cell(r.mean_absolute_rank),
                cell(r.mean_value_deviation),
            );
        }
        out
    }

    /// Mean of a metric over records matching a filter.
    pub fn mean_where<F, G>(&self, select: F, metric: G) -> Option<f64>
    where
        F: Fn(&SweepRecord) -> bool,
        G: Fn(&SweepRecord) -> Option<f64>,
    {
        let values: Vec<f64> = self
            .records
            .iter()
            .filter(|r| select(r))
            .filter_map(metric)
            .collect();
        if values.is_empty() {
            None
        } else {
            Some(values.iter().sum::<f64>() / values.len() as f64)
        }
    }
}
