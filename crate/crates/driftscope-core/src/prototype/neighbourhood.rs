//! Nearest-prototype assignment, NSPD/NSDD, and δ-neighbourhoods.

use super::{Prototype, PrototypeError};
use crate::dataset::{distance, Metric, TabularDataset};
use crate::linalg::percentile;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy)]
pub struct NeighbourhoodOptions {
    pub metric: Metric,
    /// Append the binary label as one extra coordinate before computing
    /// distances (off by default).
    pub label_aware: bool,
}

impl Default for NeighbourhoodOptions {
    fn default() -> Self {
        Self {
            metric: Metric::Euclidean,
            label_aware: false,
        }
    }
}

/// Per-prototype neighbourhood comparison between the two datasets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrototypeNeighbourhood {
    pub prototype_id: usize,
    pub count_d: usize,
    pub count_dp: usize,
    pub proportion_d: f64,
    pub proportion_dp: f64,
    /// Mean distance of the prototype's neighbours; `None` when the
    /// prototype has no neighbours on that side.
    pub mean_dist_d: Option<f64>,
    pub mean_dist_dp: Option<f64>,
    /// proportion_d − proportion_dp.
    pub nspd: f64,
    /// mean_dist_d − mean_dist_dp; `None` (not comparable) when either side
    /// has no neighbours.
    pub nsdd: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighbourhoodStats {
    pub per_prototype: Vec<PrototypeNeighbourhood>,
    pub metric: Metric,
    pub n_d: usize,
    pub n_dp: usize,
}

impl NeighbourhoodStats {
    /// Plot-data CSV: prototype id, nspd, nsdd (empty when not comparable).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("prototype_id,nspd,nsdd\n");
        for row in &self.per_prototype {
            let nsdd = row.nsdd.map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{},{},{}", row.prototype_id, row.nspd, nsdd);
        }
        out
    }
}

/// Nearest prototype of a sample; ties go to the lowest prototype id.
fn nearest_prototype(
    sample: &[f64],
    label: Option<f64>,
    vectors: &[Vec<f64>],
    opts: &NeighbourhoodOptions,
) -> Result<(usize, f64), PrototypeError> {
    let mut point = sample.to_vec();
    if opts.label_aware {
        point.push(label.unwrap_or(0.0));
    }
    let mut best: Option<(usize, f64)> = None;
    for (id, v) in vectors.iter().enumerate() {
        let d = distance(&point, v, opts.metric)?;
        let better = match best {
            None => true,
            Some((_, bd)) => d < bd,
        };
        if better {
            best = Some((id, d));
        }
    }
    Ok(best.expect("nonempty prototype set"))
}

/// NSPD/NSDD with default options (euclidean, label-agnostic).
pub fn neighbourhood_stats(
    prototypes: &[Prototype],
    d: &TabularDataset,
    d_prime: &TabularDataset,
    metric: Metric,
) -> Result<NeighbourhoodStats, PrototypeError> {
    neighbourhood_stats_opts(
        prototypes,
        d,
        d_prime,
        &NeighbourhoodOptions {
            metric,
            label_aware: false,
        },
    )
}

/// NSPD/NSDD between the datasets for a prototype set.
///
/// Every sample is assigned to exactly one prototype (a partition), so the
/// per-dataset proportions sum to 1 and the NSPD values sum to 0.
pub fn neighbourhood_stats_opts(
    prototypes: &[Prototype],
    d: &TabularDataset,
    d_prime: &TabularDataset,
    opts: &NeighbourhoodOptions,
) -> Result<NeighbourhoodStats, PrototypeError> {
    if prototypes.is_empty() {
        return Err(PrototypeError::EmptyPrototypeSet);
    }
    let vectors: Vec<Vec<f64>> = prototypes
        .iter()
        .map(|p| p.distance_vector(opts.label_aware))
        .collect();

    let side = |data: &TabularDataset| -> Result<(Vec<usize>, Vec<f64>), PrototypeError> {
        let mut counts = vec![0usize; prototypes.len()];
        let mut dist_sums = vec![0.0; prototypes.len()];
        for (i, row) in data.rows().iter().enumerate() {
            let label = data.labels().map(|l| l[i]);
            let (id, dist) = nearest_prototype(row, label, &vectors, opts)?;
            counts[id] += 1;
            dist_sums[id] += dist;
        }
        Ok((counts, dist_sums))
    };
    let (counts_d, sums_d) = side(d)?;
    let (counts_dp, sums_dp) = side(d_prime)?;

    let per_prototype = prototypes
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let proportion_d = counts_d[i] as f64 / d.n_rows() as f64;
            let proportion_dp = counts_dp[i] as f64 / d_prime.n_rows() as f64;
            let mean_dist_d = (counts_d[i] > 0).then(|| sums_d[i] / counts_d[i] as f64);
            let mean_dist_dp = (counts_dp[i] > 0).then(|| sums_dp[i] / counts_dp[i] as f64);
            let nsdd = match (mean_dist_d, mean_dist_dp) {
                (Some(a), Some(b)) => Some(a - b),
                _ => None,
            };
            PrototypeNeighbourhood {
                prototype_id: p.id,
                count_d: counts_d[i],
                count_dp: counts_dp[i],
                proportion_d,
                proportion_dp,
                mean_dist_d,
                mean_dist_dp,
                nspd: proportion_d - proportion_dp,
                nsdd,
            }
        })
        .collect();

    Ok(NeighbourhoodStats {
        per_prototype,
        metric: opts.metric,
        n_d: d.n_rows(),
        n_dp: d_prime.n_rows(),
    })
}

/// Neighbourhood radius: absolute, or a percentile of the distances from
/// the prototype to the rows of the dataset the radius is resolved on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaSpec {
    Absolute(f64),
    Percentile(f64),
}

impl DeltaSpec {
    /// Resolves to an absolute radius against `data`.
    pub fn resolve(
        &self,
        prototype: &Prototype,
        data: &TabularDataset,
        opts: &NeighbourhoodOptions,
    ) -> Result<f64, PrototypeError> {
        match *self {
            DeltaSpec::Absolute(delta) => {
                assert!(delta >= 0.0, "delta must be nonnegative");
                Ok(delta)
            }
            DeltaSpec::Percentile(p) => {
                assert!((0.0..=100.0).contains(&p), "percentile must be in [0, 100]");
                let dists = prototype_distances(prototype, data, opts)?;
                Ok(percentile(&dists, p))
            }
        }
    }
}

fn prototype_distances(
    prototype: &Prototype,
    data: &TabularDataset,
    opts: &NeighbourhoodOptions,
) -> Result<Vec<f64>, PrototypeError> {
    let v = prototype.distance_vector(opts.label_aware);
    data.rows()
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut point = row.clone();
            if opts.label_aware {
                point.push(data.labels().map_or(0.0, |l| l[i]));
            }
            distance(&point, &v, opts.metric).map_err(PrototypeError::from)
        })
        .collect()
}

/// Row indices of `data` within the δ-neighbourhood of the prototype.
/// An empty result is permitted.
pub fn delta_neighbourhood(
    prototype: &Prototype,
    data: &TabularDataset,
    delta: DeltaSpec,
    opts: &NeighbourhoodOptions,
) -> Result<Vec<usize>, PrototypeError> {
    let radius = delta.resolve(prototype, data, opts)?;
    let dists = prototype_distances(prototype, data, opts)?;
    Ok(dists
        .iter()
        .enumerate()
        .filter(|(_, d)| **d <= radius)
        .map(|(i, _)| i)
        .collect())
}
