//! Influential-example explanations.
//!
//! A logistic discriminator is trained to tell the two datasets apart from
//! their per-example intrinsic importance vectors; influence functions then
//! rank which rows of the second dataset are most responsible for the
//! discriminator's success. Removing the top-ranked rows brings the global
//! importance vectors closer together, which the alignment statistic
//! quantifies.

mod logistic;
mod provider;
mod scores;

pub use logistic::{
    example_gradient, fit_logistic, fit_logistic_weighted, log_loss, mean_test_loss,
    regularized_hessian, regularized_objective, sigmoid, LogisticModel,
};
pub use provider::{concat_datasets, RashomonDatasetProvider};
pub use scores::{
    alignment, influence_scores, loo_retrain_oracle, stacked_influence, top_k_influential,
    DatasetLifimProvider, InfluenceReport, StackedInfluence, TopKOptions,
};

use crate::dataset::DatasetError;
use crate::rashomon::RashomonError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InfluenceError {
    #[error("training data must contain both classes")]
    SingleClass,
    #[error("regularized Hessian is singular (is l2 zero?)")]
    SingularHessian,
    #[error(
        "model did not converge (gradient norm {grad_norm:.3e} after {iterations} iterations)"
    )]
    NotConverged { grad_norm: f64, iterations: usize },
    #[error("test set is empty")]
    EmptyTestSet,
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("K = {k} is out of range for a dataset of {n} rows")]
    KOutOfRange { k: usize, n: usize },
    #[error("removal selects every row; nothing remains to recompute importance on")]
    EmptyRemainder,
    #[error("the two global importance vectors are identical; alignment is undefined")]
    IdenticalGifims,
    #[error(transparent)]
    Rashomon(#[from] RashomonError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}
