//! Interpretable explanations of the differences between two comparable
//! datasets.
//!
//! Three explanation families are provided:
//!
//! - **Prototype explanations** ([`prototype`]): representative points for a
//!   reference dataset together with neighbouring-sample proportion and
//!   distance differences (NSPD/NSDD) against a second dataset, plus partial
//!   prototypes restricted to the most stable and important features.
//! - **Influential-example explanations** ([`influence`]): a logistic
//!   discriminator over intrinsic feature-importance vectors, scored with
//!   influence functions to surface the rows most responsible for the two
//!   datasets' importance profiles diverging.
//! - **Attribute explanations** ([`attribute`]): LLM-answered yes/no
//!   attribute questions over text corpora, aggregated into per-corpus
//!   percentages and a separability score.
//!
//! Feature importance is computed by [`rashomon`]: bootstrapped ensembles of
//! near-optimal decision trees with exact interventional Shapley attribution.
//! [`eval`] holds the evaluation metrics (random triplet accuracy, global
//! permutation accuracy), the parameter sweeps, and seeded synthetic
//! generators with ground truth.
//!
//! All operations are pure functions of their inputs; every randomized
//! routine takes an explicit seed and is reproducible across runs and thread
//! counts.

pub mod attribute;
pub mod dataset;
pub mod eval;
pub mod influence;
pub mod linalg;
pub mod prototype;
pub mod rashomon;

pub use dataset::{
    BinarizationScheme, ColumnKind, DatasetError, Metric, NormalizationStats, TabularDataset,
};
pub use influence::{InfluenceReport, LogisticModel};
pub use prototype::{NeighbourhoodStats, PartialPrototype, Prototype, Provenance};
pub use rashomon::{DecisionTree, ImportanceVector, RashomonEnsemble};

use rand_chacha::rand_core::SeedableRng;

/// Mixes a master seed and a stream tag into an independent derived seed.
///
/// SplitMix64 finalizer over the combined words; avalanches so that adjacent
/// tags do not produce correlated streams.
pub fn substream_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent ChaCha8 stream from a master seed and a stream tag.
///
/// Parallel units (bootstraps, sweep grid points, generated rows) each get
/// their own substream so results do not depend on scheduling order.
pub fn substream(seed: u64, tag: u64) -> rand_chacha::ChaCha8Rng {
    rand_chacha::ChaCha8Rng::seed_from_u64(substream_seed(seed, tag))
}
