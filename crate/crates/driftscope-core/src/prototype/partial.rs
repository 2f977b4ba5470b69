//! Partial prototypes: the K features of a prototype that stay stable and
//! important across its neighbourhood in both datasets.
//!
//! Each feature j is scored per neighbour as
//!
//! ```text
//! s_j = c1·|U_j(p) − U_j(n)| + c2·(0.5·U_j(p) + 0.5·U_j(n)) + c3·|X_p[j] − X_n[j]|
//! ```
//!
//! where U_j is the 1-based rank of |importance| within its vector (rank 1 =
//! most important, ties toward the lower index) and the value term is taken
//! in normalized space. Scores are averaged over the δ-neighbourhood in each
//! dataset and summed across the two sides; the K lowest-scoring features
//! form the partial prototype.

use super::neighbourhood::{delta_neighbourhood, DeltaSpec, NeighbourhoodOptions};
use super::{Prototype, PrototypeError};
use crate::dataset::TabularDataset;
use crate::linalg::abs_desc_ranks;
use crate::rashomon::{ImportanceVector, LifimPairProvider};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectedFeature {
    pub index: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialPrototype {
    pub prototype_id: usize,
    /// Selected features ordered by ascending score, ties toward the lower
    /// index.
    pub selected: Vec<SelectedFeature>,
    /// Prototype values restricted to the selected features, in selection
    /// order.
    pub restricted: Vec<f64>,
    /// Full per-feature total scores (both sides combined).
    pub scores: Vec<f64>,
    /// Set when a side contributed nothing because its δ-neighbourhood was
    /// empty.
    pub empty_d_side: bool,
    pub empty_dp_side: bool,
}

/// One-feature score for a (prototype, neighbour) pair; ranks are computed
/// from the two importance vectors on the spot.
#[allow(clippy::too_many_arguments)]
pub fn feature_score(
    j: usize,
    prototype: &[f64],
    neighbour: &[f64],
    lifim_p: &ImportanceVector,
    lifim_n: &ImportanceVector,
    c1: f64,
    c2: f64,
    c3: f64,
) -> Result<f64, PrototypeError> {
    assert!(
        c1 >= 0.0 && c2 >= 0.0 && c3 >= 0.0,
        "coefficients must be nonnegative"
    );
    let m = prototype.len();
    if neighbour.len() != m || lifim_p.len() != m || lifim_n.len() != m {
        return Err(PrototypeError::Dataset(
            crate::dataset::DatasetError::DimensionMismatch(m, neighbour.len().min(lifim_p.len())),
        ));
    }
    if j >= m {
        return Err(PrototypeError::IndexOutOfRange { index: j, len: m });
    }
    let ranks_p = abs_desc_ranks(&lifim_p.values);
    let ranks_n = abs_desc_ranks(&lifim_n.values);
    Ok(score_term(
        j, prototype, neighbour, &ranks_p, &ranks_n, c1, c2, c3,
    ))
}

#[inline]
#[allow(clippy::too_many_arguments)]
fn score_term(
    j: usize,
    prototype: &[f64],
    neighbour: &[f64],
    ranks_p: &[usize],
    ranks_n: &[usize],
    c1: f64,
    c2: f64,
    c3: f64,
) -> f64 {
    let up = ranks_p[j] as f64;
    let un = ranks_n[j] as f64;
    c1 * (up - un).abs() + c2 * (0.5 * up + 0.5 * un) + c3 * (prototype[j] - neighbour[j]).abs()
}

#[derive(Debug, Clone, Copy)]
pub struct PartialParams {
    pub k: usize,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// Neighbourhood radius; percentiles are resolved against D's distances
    /// and the resulting absolute radius is reused for D' unless
    /// `delta_dp` overrides it.
    pub delta: DeltaSpec,
    pub delta_dp: Option<DeltaSpec>,
    pub opts: NeighbourhoodOptions,
}

impl Default for PartialParams {
    fn default() -> Self {
        Self {
            k: 3,
            c1: 1.0,
            c2: 1.0,
            c3: 1.0,
            delta: DeltaSpec::Percentile(10.0),
            delta_dp: None,
            opts: NeighbourhoodOptions::default(),
        }
    }
}

/// Partial prototypes for every prototype in the set.
///
/// With c1 = c2 = 0 the importance provider is not consulted and selection
/// reduces to value stability; otherwise a provider is required.
pub fn partial_prototypes(
    prototypes: &[Prototype],
    d: &TabularDataset,
    d_prime: &TabularDataset,
    params: &PartialParams,
    provider: Option<&dyn LifimPairProvider>,
) -> Result<Vec<PartialPrototype>, PrototypeError> {
    if prototypes.is_empty() {
        return Err(PrototypeError::EmptyPrototypeSet);
    }
    let m = d.n_features();
    assert!(params.k >= 1, "K must be at least 1");
    if params.k > m {
        return Err(PrototypeError::KTooLarge { k: params.k, m });
    }
    let need_ranks = params.c1 > 0.0 || params.c2 > 0.0;
    if need_ranks && provider.is_none() {
        return Err(PrototypeError::MissingImportanceProvider);
    }

    prototypes
        .iter()
        .map(|p| partial_for_prototype(p, d, d_prime, params, provider, need_ranks))
        .collect()
}

fn partial_for_prototype(
    prototype: &Prototype,
    d: &TabularDataset,
    d_prime: &TabularDataset,
    params: &PartialParams,
    provider: Option<&dyn LifimPairProvider>,
    need_ranks: bool,
) -> Result<PartialPrototype, PrototypeError> {
    let m = d.n_features();
    let radius_d = params.delta.resolve(prototype, d, &params.opts)?;
    let delta_dp = params.delta_dp.unwrap_or(DeltaSpec::Absolute(radius_d));
    let idx_d = delta_neighbourhood(prototype, d, DeltaSpec::Absolute(radius_d), &params.opts)?;
    let idx_dp = delta_neighbourhood(prototype, d_prime, delta_dp, &params.opts)?;

    let ranks_p: Vec<usize> = if need_ranks {
        let lifim_p = provider
            .expect("checked by caller")
            .lifim_d(&prototype.features)?;
        abs_desc_ranks(&lifim_p)
    } else {
        vec![0; m]
    };

    let side_mean = |data: &TabularDataset,
                     indices: &[usize],
                     from_d: bool|
     -> Result<Vec<f64>, PrototypeError> {
        let mut acc = vec![0.0; m];
        if indices.is_empty() {
            return Ok(acc);
        }
        for &i in indices {
            let row = data.row(i);
            let ranks_n: Vec<usize> = if need_ranks {
                let lifim_n = if from_d {
                    provider.expect("checked").lifim_d(row)?
                } else {
                    provider.expect("checked").lifim_dp(row)?
                };
                abs_desc_ranks(&lifim_n)
            } else {
                vec![0; m]
            };
            for (j, slot) in acc.iter_mut().enumerate() {
                *slot += score_term(
                    j,
                    &prototype.features,
                    row,
                    &ranks_p,
                    &ranks_n,
                    params.c1,
                    params.c2,
                    params.c3,
                );
            }
        }
        for slot in &mut acc {
            *slot /= indices.len() as f64;
        }
        Ok(acc)
    };

    let mean_d = side_mean(d, &idx_d, true)?;
    let mean_dp = side_mean(d_prime, &idx_dp, false)?;
    let scores: Vec<f64> = mean_d.iter().zip(&mean_dp).map(|(a, b)| a + b).collect();

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        scores[a]
            .partial_cmp(&scores[b])
            .expect("NaN feature score")
            .then(a.cmp(&b))
    });
    let selected: Vec<SelectedFeature> = order[..params.k]
        .iter()
        .map(|&index| SelectedFeature {
            index,
            score: scores[index],
        })
        .collect();
    let restricted = selected
        .iter()
        .map(|s| prototype.features[s.index])
        .collect();

    Ok(PartialPrototype {
        prototype_id: prototype.id,
        selected,
        restricted,
        scores,
        empty_d_side: idx_d.is_empty(),
        empty_dp_side: idx_dp.is_empty(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::parse_csv;
    use crate::prototype::Provenance;
    use crate::rashomon::{Provenance as ImportanceProvenance, RashomonError};

    fn iv(values: Vec<f64>) -> ImportanceVector {
        ImportanceVector {
            values,
            provenance: ImportanceProvenance::Lifim { example: None },
        }
    }

    fn proto(features: Vec<f64>) -> Prototype {
        Prototype {
            id: 0,
            features,
            label: None,
            provenance: Provenance::Manual,
        }
    }

    /// Provider that derives an importance vector from the row itself via a
    /// fixed function — deterministic and dataset-tagged.
    struct FnProvider<F: Fn(&[f64], bool) -> Vec<f64> + Sync> {
        m: usize,
        f: F,
    }

    impl<F: Fn(&[f64], bool) -> Vec<f64> + Sync> LifimPairProvider for FnProvider<F> {
        fn n_source_features(&self) -> usize {
            self.m
        }
        fn lifim_d(&self, x: &[f64]) -> Result<Vec<f64>, RashomonError> {
            Ok((self.f)(x, true))
        }
        fn lifim_dp(&self, x: &[f64]) -> Result<Vec<f64>, RashomonError> {
            Ok((self.f)(x, false))
        }
    }

    #[test]
    fn value_only_score_zero_for_identical_values() {
        let p = [1.0, 2.0];
        let n = [1.0, 5.0];
        let s = feature_score(
            0,
            &p,
            &n,
            &iv(vec![0.5, 0.1]),
            &iv(vec![0.1, 0.5]),
            0.0,
            0.0,
            1.0,
        )
        .unwrap();
        assert_eq!(s, 0.0);
    }

    #[test]
    fn rank_only_score_zero_for_equal_ranks() {
        let p = [1.0, 2.0];
        let n = [9.0, -3.0];
        // Both vectors rank feature 0 first.
        let s = feature_score(
            0,
            &p,
            &n,
            &iv(vec![0.9, 0.1]),
            &iv(vec![0.8, 0.2]),
            1.0,
            0.0,
            0.0,
        )
        .unwrap();
        assert_eq!(s, 0.0);
    }

    #[test]
    fn rank_terms_evaluate_directly() {
        // Feature 0: rank 1 under p, rank 3 under n → |1−3| + (0.5·1+0.5·3) = 4.
        let lifim_p = iv(vec![0.9, 0.5, 0.1]);
        let lifim_n = iv(vec![0.1, 0.9, 0.5]);
        let s = feature_score(0, &[0.0; 3], &[0.0; 3], &lifim_p, &lifim_n, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(s, 4.0);
    }

    #[test]
    fn index_out_of_range_is_reported() {
        assert!(matches!(
            feature_score(
                2,
                &[0.0; 2],
                &[0.0; 2],
                &iv(vec![0.0; 2]),
                &iv(vec![0.0; 2]),
                1.0,
                0.0,
                0.0
            ),
            Err(PrototypeError::IndexOutOfRange { index: 2, len: 2 })
        ));
    }

    #[test]
    fn stable_important_feature_wins() {
        // Four features: A differs a lot in value but is important for
        // both; B and C are unimportant with stable values; D is
        // value-stable, moderately rank-stable, and important for both.
        // With K = 1 the scoring picks D.
        let d = parse_csv("a,b,c,d\n0.1,0.45,0.55,0.7\n", None).unwrap();
        let dp = parse_csv("a,b,c,d\n0.1,0.45,0.55,0.7\n", None).unwrap();
        let p = proto(vec![0.9, 0.5, 0.5, 0.7]);
        let provider = FnProvider {
            m: 4,
            f: |x: &[f64], from_d: bool| {
                // The prototype (from D) and the neighbour (from D') carry
                // different but fixed importance profiles.
                if from_d && x[0] > 0.5 {
                    vec![0.9, 0.1, 0.2, 0.8] // prototype: A=1, D=2, C=3, B=4
                } else {
                    vec![0.8, 0.15, 0.1, 0.9] // neighbour: D=1, A=2, B=3, C=4
                }
            },
        };
        let params = PartialParams {
            k: 1,
            c1: 1.0,
            c2: 1.0,
            c3: 1.0,
            delta: DeltaSpec::Percentile(100.0),
            delta_dp: Some(DeltaSpec::Percentile(100.0)),
            opts: NeighbourhoodOptions::default(),
        };
        let partials = partial_prototypes(&[p], &d, &dp, &params, Some(&provider)).unwrap();
        assert_eq!(partials[0].selected[0].index, 3);
    }

    #[test]
    fn k_equals_m_recovers_full_prototype() {
        let d = parse_csv("a,b,c\n1,2,3\n2,3,4\n", None).unwrap();
        let p = proto(vec![1.5, 2.5, 3.5]);
        let params = PartialParams {
            k: 3,
            c1: 0.0,
            c2: 0.0,
            c3: 1.0,
            delta: DeltaSpec::Percentile(100.0),
            ..PartialParams::default()
        };
        let partials = partial_prototypes(std::slice::from_ref(&p), &d, &d, &params, None).unwrap();
        let mut indices: Vec<usize> = partials[0].selected.iter().map(|s| s.index).collect();
        indices.sort_unstable();
        assert_eq!(indices, vec![0, 1, 2]);
        // Restricted vector is a permutation of the full prototype.
        let mut restricted = partials[0].restricted.clone();
        restricted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(restricted, vec![1.5, 2.5, 3.5]);
    }

    #[test]
    fn value_stability_ordering_matches_brute_force() {
        // c1 = c2 = 0, K = M: score order equals ordering by neighbourhood
        // mean absolute deviation from the prototype.
        let mut csv = String::from("a,b,c,d,e\n");
        let mut rng = crate::substream(42, 9);
        use rand::Rng;
        for _ in 0..20 {
            let row: Vec<String> = (0..5)
                .map(|j| (rng.random::<f64>() * (j as f64 + 0.3)).to_string())
                .collect();
            csv.push_str(&(row.join(",") + "\n"));
        }
        let d = parse_csv(&csv, None).unwrap();
        let p = proto(vec![0.5; 5]);
        let params = PartialParams {
            k: 5,
            c1: 0.0,
            c2: 0.0,
            c3: 1.0,
            delta: DeltaSpec::Percentile(100.0),
            ..PartialParams::default()
        };
        let partials = partial_prototypes(std::slice::from_ref(&p), &d, &d, &params, None).unwrap();
        // Brute-force mean |Δ| per feature over the full neighbourhood; both
        // sides equal here so the sum is 2× the one-sided mean.
        let mut expected: Vec<(usize, f64)> = (0..5)
            .map(|j| {
                let mad: f64 =
                    d.rows().iter().map(|r| (r[j] - 0.5).abs()).sum::<f64>() / d.n_rows() as f64;
                (j, 2.0 * mad)
            })
            .collect();
        expected.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
        let got: Vec<usize> = partials[0].selected.iter().map(|s| s.index).collect();
        let want: Vec<usize> = expected.iter().map(|(j, _)| *j).collect();
        assert_eq!(got, want);
        for (sel, (_, score)) in partials[0].selected.iter().zip(&expected) {
            assert!((sel.score - score).abs() < 1e-12);
        }
    }

    #[test]
    fn column_permutation_relabels_selection() {
        let d = parse_csv("a,b,c\n0.9,2.1,3.4\n1.2,2.0,3.1\n", None).unwrap();
        let perm = parse_csv("c,a,b\n3.4,0.9,2.1\n3.1,1.2,2.0\n", None).unwrap();
        let params = PartialParams {
            k: 2,
            c1: 0.0,
            c2: 0.0,
            c3: 1.0,
            delta: DeltaSpec::Percentile(100.0),
            ..PartialParams::default()
        };
        let p = proto(vec![1.0, 2.0, 3.0]);
        let p_perm = proto(vec![3.0, 1.0, 2.0]);
        let base = partial_prototypes(&[p], &d, &d, &params, None).unwrap();
        let permuted = partial_prototypes(&[p_perm], &perm, &perm, &params, None).unwrap();
        // Map base indices through the permutation (a,b,c) -> (c,a,b).
        let map = [1usize, 2, 0];
        let base_mapped: Vec<usize> = base[0].selected.iter().map(|s| map[s.index]).collect();
        let got: Vec<usize> = permuted[0].selected.iter().map(|s| s.index).collect();
        assert_eq!(base_mapped, got);
    }

    #[test]
    fn missing_provider_with_rank_terms_is_rejected() {
        let d = parse_csv("a\n1\n", None).unwrap();
        let params = PartialParams {
            k: 1,
            c1: 1.0,
            c2: 0.0,
            c3: 0.0,
            delta: DeltaSpec::Percentile(100.0),
            ..PartialParams::default()
        };
        assert!(matches!(
            partial_prototypes(&[proto(vec![0.0])], &d, &d, &params, None),
            Err(PrototypeError::MissingImportanceProvider)
        ));
    }

    #[test]
    fn empty_sides_are_flagged() {
        let d = parse_csv("a\n100\n", None).unwrap();
        let dp = parse_csv("a\n0.1\n", None).unwrap();
        let params = PartialParams {
            k: 1,
            c1: 0.0,
            c2: 0.0,
            c3: 1.0,
            delta: DeltaSpec::Absolute(1.0),
            ..PartialParams::default()
        };
        let partials = partial_prototypes(&[proto(vec![0.0])], &d, &dp, &params, None).unwrap();
        assert!(partials[0].empty_d_side);
        assert!(!partials[0].empty_dp_side);
    }
}
