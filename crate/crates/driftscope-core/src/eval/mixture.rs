//! Circle Gaussian-mixture pair generators.
//!
//! Cluster centers sit on a circle at shared angles, so the two datasets'
//! clusters are paired by index and shifted by the radius difference. The
//! first dataset uses equal cluster proportions; the second may draw its
//! proportions from a Dirichlet distribution.

use super::EvalError;
use crate::dataset::TabularDataset;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProportionsMode {
    Equal { per_cluster: usize },
    Dirichlet { alpha: f64, total: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixturePairSpec {
    pub clusters: usize,
    pub radius: f64,
    /// Isotropic Gaussian standard deviation around each center.
    pub std: f64,
    pub proportions: ProportionsMode,
    pub seed: u64,
}

impl MixturePairSpec {
    /// The inner dataset of the classic configuration: 6 clusters on a
    /// radius-10 circle, 60 points each.
    pub fn case1_x(seed: u64) -> Self {
        Self {
            clusters: 6,
            radius: 10.0,
            std: 1.0,
            proportions: ProportionsMode::Equal { per_cluster: 60 },
            seed,
        }
    }

    /// The outer dataset of the equal-proportion configuration.
    pub fn case1_y(seed: u64) -> Self {
        Self {
            radius: 20.0,
            ..Self::case1_x(seed)
        }
    }

    /// The outer dataset with Dirichlet(1,…,1) proportions over 360 points.
    pub fn case2_y(seed: u64) -> Self {
        Self {
            proportions: ProportionsMode::Dirichlet {
                alpha: 1.0,
                total: 360,
            },
            ..Self::case1_y(seed)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureGroundTruth {
    /// Shared center angles, ascending.
    pub angles: Vec<f64>,
    pub centers_x: Vec<[f64; 2]>,
    pub centers_y: Vec<[f64; 2]>,
    /// Intended cluster proportions (exact for equal mode, the sampled
    /// Dirichlet vector otherwise).
    pub proportions_x: Vec<f64>,
    pub proportions_y: Vec<f64>,
    /// Realized per-cluster counts.
    pub counts_x: Vec<usize>,
    pub counts_y: Vec<usize>,
    /// Generating cluster of every row, in row order.
    pub assignments_x: Vec<usize>,
    pub assignments_y: Vec<usize>,
    pub spec_x: MixturePairSpec,
    pub spec_y: MixturePairSpec,
}

impl MixtureGroundTruth {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("ground truth serializes")
    }
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; u1 in (0, 1] avoids ln(0).
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Gamma(shape, 1) via Marsaglia–Tsang, with the boost trick for shape < 1.
fn gamma(shape: f64, rng: &mut ChaCha8Rng) -> f64 {
    if shape < 1.0 {
        let u: f64 = rng.random::<f64>();
        return gamma(shape + 1.0, rng) * u.powf(1.0 / shape);
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = gauss(rng);
        let v = (1.0 + c * x).powi(3);
        if v <= 0.0 {
            continue;
        }
        let u: f64 = rng.random::<f64>();
        if u.ln() < 0.5 * x * x + d - d * v + d * v.ln() {
            return d * v;
        }
    }
}

fn dirichlet(alpha: f64, k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let draws: Vec<f64> = (0..k).map(|_| gamma(alpha, rng)).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|g| g / total).collect()
}

fn validate(spec: &MixturePairSpec) -> Result<(), EvalError> {
    if spec.clusters == 0 {
        return Err(EvalError::InvalidSpec("clusters must be at least 1".into()));
    }
    if spec.radius <= 0.0 {
        return Err(EvalError::InvalidSpec("radius must be positive".into()));
    }
    if spec.std <= 0.0 {
        return Err(EvalError::InvalidSpec("std must be positive".into()));
    }
    match spec.proportions {
        ProportionsMode::Equal { per_cluster: 0 } => Err(EvalError::InvalidSpec(
            "per_cluster must be at least 1".into(),
        )),
        ProportionsMode::Dirichlet { alpha, total } => {
            if alpha <= 0.0 {
                Err(EvalError::InvalidSpec("alpha must be positive".into()))
            } else if total == 0 {
                Err(EvalError::InvalidSpec("total must be at least 1".into()))
            } else {
                Ok(())
            }
        }
        _ => Ok(()),
    }
}

struct GeneratedSide {
    data: TabularDataset,
    proportions: Vec<f64>,
    counts: Vec<usize>,
    assignments: Vec<usize>,
}

fn generate_side(spec: &MixturePairSpec, centers: &[[f64; 2]]) -> GeneratedSide {
    let k = spec.clusters;
    let mut rng = crate::substream(spec.seed, 0x706f_696e_7473);
    let (proportions, cluster_of_point): (Vec<f64>, Vec<usize>) = match spec.proportions {
        ProportionsMode::Equal { per_cluster } => {
            let assign: Vec<usize> = (0..k)
                .flat_map(|c| std::iter::repeat_n(c, per_cluster))
                .collect();
            (vec![1.0 / k as f64; k], assign)
        }
        ProportionsMode::Dirichlet { alpha, total } => {
            let pi = dirichlet(alpha, k, &mut rng);
            let cumulative: Vec<f64> = pi
                .iter()
                .scan(0.0, |acc, p| {
                    *acc += p;
                    Some(*acc)
                })
                .collect();
            let assign: Vec<usize> = (0..total)
                .map(|_| {
                    let u: f64 = rng.random::<f64>();
                    cumulative.iter().position(|&c| u < c).unwrap_or(k - 1)
                })
                .collect();
            (pi, assign)
        }
    };
    let mut counts = vec![0usize; k];
    let rows: Vec<Vec<f64>> = cluster_of_point
        .iter()
        .map(|&c| {
            counts[c] += 1;
            let center = centers[c];
            vec![
                center[0] + spec.std * gauss(&mut rng),
                center[1] + spec.std * gauss(&mut rng),
            ]
        })
        .collect();
    let data = TabularDataset::new(vec!["x".into(), "y".into()], rows, None)
        .expect("generated rows are rectangular");
    GeneratedSide {
        data,
        proportions,
        counts,
        assignments: cluster_of_point,
    }
}

/// Generates the paired mixture datasets plus ground truth.
///
/// Angles are drawn once from the first spec's seed and shared, so cluster i
/// of X and cluster i of Y sit on the same ray. Centers lie exactly on their
/// circles. Bit-reproducible for fixed seeds.
pub fn gen_circle_mixture_pair(
    spec_x: &MixturePairSpec,
    spec_y: &MixturePairSpec,
) -> Result<(TabularDataset, TabularDataset, MixtureGroundTruth), EvalError> {
    validate(spec_x)?;
    validate(spec_y)?;
    if spec_x.clusters != spec_y.clusters {
        return Err(EvalError::InvalidSpec(format!(
            "paired specs need equal cluster counts ({} vs {})",
            spec_x.clusters, spec_y.clusters
        )));
    }
    let k = spec_x.clusters;
    let mut angle_rng = crate::substream(spec_x.seed, 0x616e_676c_6573);
    let mut angles: Vec<f64> = (0..k)
        .map(|_| angle_rng.random::<f64>() * std::f64::consts::TAU)
        .collect();
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let centers = |radius: f64| -> Vec<[f64; 2]> {
        angles
            .iter()
            .map(|a| [radius * a.cos(), radius * a.sin()])
            .collect()
    };
    let centers_x = centers(spec_x.radius);
    let centers_y = centers(spec_y.radius);

    let side_x = generate_side(spec_x, &centers_x);
    let side_y = generate_side(spec_y, &centers_y);

    let truth = MixtureGroundTruth {
        angles,
        centers_x,
        centers_y,
        proportions_x: side_x.proportions,
        proportions_y: side_y.proportions,
        counts_x: side_x.counts,
        counts_y: side_y.counts,
        assignments_x: side_x.assignments,
        assignments_y: side_y.assignments,
        spec_x: *spec_x,
        spec_y: *spec_y,
    };
    Ok((side_x.data, side_y.data, truth))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case1_sizes_and_counts() {
        let (x, y, truth) =
            gen_circle_mixture_pair(&MixturePairSpec::case1_x(4), &MixturePairSpec::case1_y(5))
                .unwrap();
        assert_eq!(x.n_rows(), 360);
        assert_eq!(y.n_rows(), 360);
        assert_eq!(truth.counts_x, vec![60; 6]);
        assert_eq!(truth.counts_y, vec![60; 6]);
    }

    #[test]
    fn centers_lie_exactly_on_their_circles() {
        let (_, _, truth) =
            gen_circle_mixture_pair(&MixturePairSpec::case1_x(9), &MixturePairSpec::case1_y(10))
                .unwrap();
        for c in &truth.centers_x {
            let r = (c[0] * c[0] + c[1] * c[1]).sqrt();
            assert!((r - 10.0).abs() < 1e-9);
        }
        for c in &truth.centers_y {
            let r = (c[0] * c[0] + c[1] * c[1]).sqrt();
            assert!((r - 20.0).abs() < 1e-9);
        }
    }

    #[test]
    fn paired_centers_share_angles() {
        let (_, _, truth) =
            gen_circle_mixture_pair(&MixturePairSpec::case1_x(2), &MixturePairSpec::case1_y(3))
                .unwrap();
        for (cx, cy) in truth.centers_x.iter().zip(&truth.centers_y) {
            assert!((cx[0] * 2.0 - cy[0]).abs() < 1e-9);
            assert!((cx[1] * 2.0 - cy[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn dirichlet_proportions_match_empirical_counts() {
        let (_, y, truth) =
            gen_circle_mixture_pair(&MixturePairSpec::case1_x(7), &MixturePairSpec::case2_y(8))
                .unwrap();
        let total: f64 = truth.proportions_y.iter().sum();
        assert!((total - 1.0).abs() <= 1e-12);
        let n = y.n_rows() as f64;
        let tolerance = 3.0 / n.sqrt();
        for (count, pi) in truth.counts_y.iter().zip(&truth.proportions_y) {
            let empirical = *count as f64 / n;
            assert!(
                (empirical - pi).abs() <= tolerance,
                "empirical {empirical} vs sampled {pi}"
            );
        }
    }

    #[test]
    fn bit_reproducible_for_fixed_seeds() {
        let run = || {
            gen_circle_mixture_pair(&MixturePairSpec::case1_x(42), &MixturePairSpec::case2_y(43))
                .unwrap()
        };
        let (x1, y1, t1) = run();
        let (x2, y2, t2) = run();
        assert_eq!(x1, x2);
        assert_eq!(y1, y2);
        assert_eq!(t1, t2);
    }

    #[test]
    fn invalid_specs_rejected() {
        let bad = MixturePairSpec {
            radius: -1.0,
            ..MixturePairSpec::case1_x(0)
        };
        assert!(matches!(
            gen_circle_mixture_pair(&bad, &MixturePairSpec::case1_y(0)),
            Err(EvalError::InvalidSpec(_))
        ));
        let mismatched = MixturePairSpec {
            clusters: 5,
            ..MixturePairSpec::case1_y(0)
        };
        assert!(matches!(
            gen_circle_mixture_pair(&MixturePairSpec::case1_x(0), &mismatched),
            Err(EvalError::InvalidSpec(_))
        ));
    }
}
