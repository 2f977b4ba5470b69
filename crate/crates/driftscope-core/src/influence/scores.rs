//! Influence scores, the leave-one-out retraining oracle, and the
//! end-to-end influential-example pipeline.

use super::logistic::{
    example_gradient, fit_logistic, fit_logistic_weighted, mean_test_loss, regularized_hessian,
    LogisticModel,
};
use super::InfluenceError;
use crate::dataset::TabularDataset;
use crate::linalg::{cholesky, cholesky_solve, l2_norm};
use crate::rashomon::RashomonError;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// First-order influence of each training example on the mean test loss.
///
/// score(i) = ḡᵀ H⁻¹ ∇L(Zᵢ, θ̂), with ḡ the mean test-loss gradient and H the
/// regularized-objective Hessian at θ̂. A positive score means removing the
/// example increases the test loss. H is factorized once; a single solve
/// against ḡ turns every per-example score into a dot product.
pub fn influence_scores(
    model: &LogisticModel,
    train_x: &[Vec<f64>],
    train_y: &[f64],
    test_x: &[Vec<f64>],
    test_y: &[f64],
) -> Result<Vec<f64>, InfluenceError> {
    if test_x.is_empty() {
        return Err(InfluenceError::EmptyTestSet);
    }
    if !model.converged {
        return Err(InfluenceError::NotConverged {
            grad_norm: model.final_grad_norm,
            iterations: model.iterations,
        });
    }
    let dim = model.n_features() + 1;
    let mut mean_grad = vec![0.0; dim];
    for (x, &y) in test_x.iter().zip(test_y) {
        let g = example_gradient(model, x, y);
        for (m, v) in mean_grad.iter_mut().zip(&g) {
            *m += v;
        }
    }
    for v in &mut mean_grad {
        *v /= test_x.len() as f64;
    }

    let h = regularized_hessian(model, train_x);
    let l = cholesky(&h).ok_or(InfluenceError::SingularHessian)?;
    let solved = cholesky_solve(&l, &mean_grad);

    Ok(train_x
        .par_iter()
        .zip(train_y.par_iter())
        .map(|(x, &y)| {
            let g = example_gradient(model, x, y);
            g.iter().zip(&solved).map(|(a, b)| a * b).sum()
        })
        .collect())
}

/// Empirical counterpart of [`influence_scores`]: for each training row,
/// refit without it and return the change in mean test loss caused by the
/// removal, L_test(θ̂₋ᵢ) − L_test(θ̂). Positive delta means the removal
/// increased the test loss, matching the influence-score sign.
///
/// The refit keeps the original 1/n divisor (the held-out row gets weight 0),
/// so the regularization strength is unchanged. Sequential by design; this
/// is the validation oracle.
pub fn loo_retrain_oracle(
    train_x: &[Vec<f64>],
    train_y: &[f64],
    test_x: &[Vec<f64>],
    test_y: &[f64],
    l2: f64,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>, InfluenceError> {
    let full = fit_logistic(train_x, train_y, l2, tol, max_iter)?;
    let base_loss = mean_test_loss(&full, test_x, test_y);
    let mut deltas = Vec::with_capacity(train_x.len());
    for i in 0..train_x.len() {
        let mut weights = vec![1.0; train_x.len()];
        weights[i] = 0.0;
        let refit = fit_logistic_weighted(train_x, train_y, Some(&weights), l2, tol, max_iter)?;
        deltas.push(mean_test_loss(&refit, test_x, test_y) - base_loss);
    }
    Ok(deltas)
}

/// Fractional reduction in the ℓ2 gap between two datasets' global
/// importance vectors after removing a subset from the second.
pub fn alignment(g_d: &[f64], g_dp: &[f64], g_dp_minus_s: &[f64]) -> Result<f64, InfluenceError> {
    assert_eq!(g_d.len(), g_dp.len());
    assert_eq!(g_d.len(), g_dp_minus_s.len());
    let before: f64 = gap(g_d, g_dp);
    if before == 0.0 {
        return Err(InfluenceError::IdenticalGifims);
    }
    let after = gap(g_d, g_dp_minus_s);
    Ok((before - after) / before)
}

fn gap(a: &[f64], b: &[f64]) -> f64 {
    l2_norm(&a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<f64>>())
}

/// Dataset-level intrinsic-importance oracle used by the influential-example
/// pipeline: per-row importance vectors and the freshly-computed global
/// vector for an arbitrary dataset.
pub trait DatasetLifimProvider: Sync {
    /// Per-row LiFIM vectors for every row of `data`, in row order.
    fn lifims(&self, data: &TabularDataset, seed: u64) -> Result<Vec<Vec<f64>>, RashomonError>;
    /// Global intrinsic importance of `data` from a fresh seeded ensemble.
    fn gifim(&self, data: &TabularDataset, seed: u64) -> Result<Vec<f64>, RashomonError>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfluenceReport {
    /// Influence score per row of the stacked importance dataset: the first
    /// `n_d` entries are D's rows, the remaining `n_dp` are D''s.
    pub scores: Vec<f64>,
    pub n_d: usize,
    pub n_dp: usize,
    /// Selected rows, as indices into D' (0-based).
    pub selected_ids: Vec<usize>,
    pub alignment: f64,
    pub discriminator_accuracy: f64,
    pub gifim_d: Vec<f64>,
    pub gifim_dp: Vec<f64>,
    pub gifim_dp_minus_s: Vec<f64>,
    /// ℓ2 importance gaps before and after removal.
    pub gap_before: f64,
    pub gap_after: f64,
}

impl InfluenceReport {
    /// The documented JSON wire format.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "scores": self.scores,
            "n_d": self.n_d,
            "n_dp": self.n_dp,
            "selected_ids": self.selected_ids,
            "alignment": self.alignment,
            "discriminator_accuracy": self.discriminator_accuracy,
            "gifim_triplet": {
                "d": self.gifim_d,
                "dp": self.gifim_dp,
                "dp_minus_s": self.gifim_dp_minus_s,
            },
            "gap_before": self.gap_before,
            "gap_after": self.gap_after,
        })
    }

    /// Companion CSV: row id (stacked order), score, selected flag.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row_id,score,selected\n");
        for (i, score) in self.scores.iter().enumerate() {
            let selected = i >= self.n_d && self.selected_ids.contains(&(i - self.n_d));
            let _ = writeln!(out, "{i},{score},{}", u8::from(selected));
        }
        out
    }
}

/// Options for [`top_k_influential`].
#[derive(Debug, Clone, Copy)]
pub struct TopKOptions {
    pub k: usize,
    pub l2: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Balance the discriminator loss by class when D and D' differ in size.
    pub class_weighted: bool,
    pub seed: u64,
}

impl Default for TopKOptions {
    fn default() -> Self {
        Self {
            k: 10,
            l2: 1e-2,
            tol: 1e-8,
            max_iter: 100,
            class_weighted: false,
            seed: 0,
        }
    }
}

/// The discriminator-and-scoring stage shared by [`top_k_influential`] and
/// the removal sweeps: stacked importance features, influence scores, and
/// the two datasets' global importance vectors (means of the per-row
/// vectors, per their definition).
pub struct StackedInfluence {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<f64>,
    pub scores: Vec<f64>,
    pub gifim_d: Vec<f64>,
    pub gifim_dp: Vec<f64>,
    pub discriminator_accuracy: f64,
    /// D' row ids ordered by descending score, ties toward the lower id.
    pub dp_ranking: Vec<usize>,
}

fn column_mean(rows: &[Vec<f64>]) -> Vec<f64> {
    let m = rows[0].len();
    let mut acc = vec![0.0; m];
    for row in rows {
        for (a, v) in acc.iter_mut().zip(row) {
            *a += v;
        }
    }
    for a in &mut acc {
        *a /= rows.len() as f64;
    }
    acc
}

/// Runs the membership discriminator over per-row importance vectors and
/// scores every stacked row by influence (the stacked set is also the test
/// set).
pub fn stacked_influence<P: DatasetLifimProvider>(
    d: &TabularDataset,
    d_prime: &TabularDataset,
    provider: &P,
    opts: &TopKOptions,
) -> Result<StackedInfluence, InfluenceError> {
    if d.n_rows() == 0 || d_prime.n_rows() == 0 {
        return Err(InfluenceError::EmptyDataset);
    }
    let lifims_d = provider.lifims(d, crate::substream_seed(opts.seed, 1))?;
    let lifims_dp = provider.lifims(d_prime, crate::substream_seed(opts.seed, 2))?;
    let gifim_d = column_mean(&lifims_d);
    let gifim_dp = column_mean(&lifims_dp);

    let mut features = lifims_d;
    features.extend(lifims_dp);
    let mut labels = vec![1.0; d.n_rows()];
    labels.extend(vec![0.0; d_prime.n_rows()]);

    let sample_weights = opts.class_weighted.then(|| {
        let n = labels.len() as f64;
        let n1 = d.n_rows() as f64;
        let n0 = d_prime.n_rows() as f64;
        labels
            .iter()
            .map(|&y| {
                if y == 1.0 {
                    n / (2.0 * n1)
                } else {
                    n / (2.0 * n0)
                }
            })
            .collect::<Vec<f64>>()
    });
    let model = fit_logistic_weighted(
        &features,
        &labels,
        sample_weights.as_deref(),
        opts.l2,
        opts.tol,
        opts.max_iter,
    )?;
    let discriminator_accuracy = model.accuracy(&features, &labels);
    let scores = influence_scores(&model, &features, &labels, &features, &labels)?;

    let mut dp_ranking: Vec<usize> = (0..d_prime.n_rows()).collect();
    dp_ranking.sort_by(|&a, &b| {
        let sa = scores[d.n_rows() + a];
        let sb = scores[d.n_rows() + b];
        sb.partial_cmp(&sa)
            .expect("NaN influence score")
            .then(a.cmp(&b))
    });

    Ok(StackedInfluence {
        features,
        labels,
        scores,
        gifim_d,
        gifim_dp,
        discriminator_accuracy,
        dp_ranking,
    })
}

/// The end-to-end influential-example pipeline.
///
/// Builds the stacked importance dataset (D rows labeled 1, D' rows 0),
/// trains the logistic discriminator, scores every row by influence with the
/// stacked set as the test set, selects the K highest-scoring D' rows (ties
/// toward the lower row id), recomputes the global importance of D' minus
/// the selection with a fresh ensemble, and reports the alignment.
pub fn top_k_influential<P: DatasetLifimProvider>(
    d: &TabularDataset,
    d_prime: &TabularDataset,
    provider: &P,
    opts: &TopKOptions,
) -> Result<InfluenceReport, InfluenceError> {
    if opts.k == 0 || opts.k > d_prime.n_rows().max(1) {
        return Err(InfluenceError::KOutOfRange {
            k: opts.k,
            n: d_prime.n_rows(),
        });
    }
    let stacked = stacked_influence(d, d_prime, provider, opts)?;

    let mut selected_ids: Vec<usize> = stacked.dp_ranking[..opts.k].to_vec();
    selected_ids.sort_unstable();

    let keep: Vec<usize> = (0..d_prime.n_rows())
        .filter(|i| !selected_ids.contains(i))
        .collect();
    if keep.is_empty() {
        return Err(InfluenceError::EmptyRemainder);
    }
    let remainder = d_prime.subset(&keep);
    let gifim_dpp = provider.gifim(&remainder, crate::substream_seed(opts.seed, 3))?;

    let gap_before = gap(&stacked.gifim_d, &stacked.gifim_dp);
    let gap_after = gap(&stacked.gifim_d, &gifim_dpp);
    let alignment = alignment(&stacked.gifim_d, &stacked.gifim_dp, &gifim_dpp)?;

    Ok(InfluenceReport {
        scores: stacked.scores,
        n_d: d.n_rows(),
        n_dp: d_prime.n_rows(),
        selected_ids,
        alignment,
        discriminator_accuracy: stacked.discriminator_accuracy,
        gifim_d: stacked.gifim_d,
        gifim_dp: stacked.gifim_dp,
        gifim_dp_minus_s: gifim_dpp,
        gap_before,
        gap_after,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::TabularDataset;
    use crate::linalg::pearson;
    use rand::Rng;

    fn synthetic_task(n: usize, m: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut rng = crate::substream(seed, 0x7461_736b);
        let mut xs = Vec::with_capacity(n);
        let mut ys = Vec::with_capacity(n);
        for i in 0..n {
            let y = f64::from(i % 2 == 0);
            let shift = if y == 1.0 { 0.8 } else { -0.8 };
            let x: Vec<f64> = (0..m)
                .map(|j| {
                    let noise: f64 = rng.random::<f64>() * 2.0 - 1.0;
                    if j == 0 {
                        shift + noise
                    } else {
                        noise
                    }
                })
                .collect();
            xs.push(x);
            ys.push(y);
        }
        (xs, ys)
    }

    #[test]
    fn duplicate_training_rows_get_identical_scores() {
        let train_x = vec![
            vec![1.0, 0.5],
            vec![-1.0, 0.2],
            vec![1.0, 0.5],
            vec![0.3, -0.8],
        ];
        let train_y = [1.0, 0.0, 1.0, 0.0];
        let model = fit_logistic(&train_x, &train_y, 1e-2, 1e-10, 100).unwrap();
        let scores = influence_scores(&model, &train_x, &train_y, &train_x, &train_y).unwrap();
        assert_eq!(scores[0], scores[2]);
    }

    #[test]
    fn test_set_duplication_leaves_scores_unchanged() {
        let (train_x, train_y) = synthetic_task(12, 2, 5);
        let model = fit_logistic(&train_x, &train_y, 1e-2, 1e-10, 100).unwrap();
        let single = influence_scores(&model, &train_x, &train_y, &train_x, &train_y).unwrap();
        let mut doubled_x = train_x.clone();
        doubled_x.extend(train_x.clone());
        let mut doubled_y = train_y.clone();
        doubled_y.extend(train_y.clone());
        let doubled = influence_scores(&model, &train_x, &train_y, &doubled_x, &doubled_y).unwrap();
        for (a, b) in single.iter().zip(&doubled) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn test_set_permutation_leaves_scores_unchanged() {
        let (train_x, train_y) = synthetic_task(10, 2, 6);
        let model = fit_logistic(&train_x, &train_y, 1e-2, 1e-10, 100).unwrap();
        let base = influence_scores(&model, &train_x, &train_y, &train_x, &train_y).unwrap();
        let perm: Vec<usize> = (0..10).rev().collect();
        let px: Vec<Vec<f64>> = perm.iter().map(|&i| train_x[i].clone()).collect();
        let py: Vec<f64> = perm.iter().map(|&i| train_y[i]).collect();
        let permuted = influence_scores(&model, &train_x, &train_y, &px, &py).unwrap();
        for (a, b) in base.iter().zip(&permuted) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn training_permutation_permutes_scores() {
        let (train_x, train_y) = synthetic_task(10, 2, 8);
        let (test_x, test_y) = synthetic_task(12, 2, 9);
        let model = fit_logistic(&train_x, &train_y, 1e-2, 1e-10, 100).unwrap();
        let base = influence_scores(&model, &train_x, &train_y, &test_x, &test_y).unwrap();
        let perm: Vec<usize> = (0..10).rev().collect();
        let px: Vec<Vec<f64>> = perm.iter().map(|&i| train_x[i].clone()).collect();
        let py: Vec<f64> = perm.iter().map(|&i| train_y[i]).collect();
        // Same model (the permuted training set has the same optimum), so
        // scores must permute along with the rows.
        let permuted = influence_scores(&model, &px, &py, &test_x, &test_y).unwrap();
        for (slot, &src) in perm.iter().enumerate() {
            assert!((permuted[slot] - base[src]).abs() < 1e-12);
        }
    }

    #[test]
    fn influence_matches_retraining_on_six_points() {
        let train_x = vec![
            vec![0.4, 1.2],
            vec![-0.9, 0.1],
            vec![1.5, -0.4],
            vec![-1.2, -0.7],
            vec![0.8, 0.9],
            vec![-0.3, -1.5],
        ];
        let train_y = [1.0, 0.0, 1.0, 0.0, 1.0, 0.0];
        let (test_x, test_y) = synthetic_task(40, 2, 21);
        let model = fit_logistic(&train_x, &train_y, 1.0, 1e-10, 200).unwrap();
        let scores = influence_scores(&model, &train_x, &train_y, &test_x, &test_y).unwrap();
        let deltas =
            loo_retrain_oracle(&train_x, &train_y, &test_x, &test_y, 1.0, 1e-10, 200).unwrap();
        let r = pearson(&scores, &deltas).unwrap();
        assert!(r >= 0.99, "pearson {r}");
    }

    #[test]
    fn oracle_sign_agreement_on_larger_synthetic() {
        let (train_x, train_y) = synthetic_task(200, 3, 11);
        let model = fit_logistic(&train_x, &train_y, 1e-2, 1e-10, 200).unwrap();
        let scores = influence_scores(&model, &train_x, &train_y, &train_x, &train_y).unwrap();
        let deltas =
            loo_retrain_oracle(&train_x, &train_y, &train_x, &train_y, 1e-2, 1e-10, 200).unwrap();
        let agree = scores
            .iter()
            .zip(&deltas)
            .filter(|(s, d)| s.signum() == d.signum())
            .count();
        assert!(
            agree as f64 >= 0.95 * scores.len() as f64,
            "sign agreement {agree}/{}",
            scores.len()
        );
    }

    #[test]
    fn removing_a_duplicate_changes_less_than_removing_an_extreme() {
        // 8 points: a duplicated pair deep on the correct side, a consistent
        // bulk, and two unique extreme-influence rows labeled against the
        // trend right at the boundary.
        let train_x = vec![
            vec![2.0],
            vec![2.0],
            vec![1.5],
            vec![-1.5],
            vec![-2.0],
            vec![-1.8],
            vec![0.3],
            vec![-0.3],
        ];
        let train_y = [1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0];
        let (test_x, test_y) = synthetic_task(40, 1, 33);
        let deltas =
            loo_retrain_oracle(&train_x, &train_y, &test_x, &test_y, 1e-3, 1e-10, 300).unwrap();
        // Removing a duplicated row (its twin remains) barely moves the fit;
        // removing the mislabeled extreme moves it far more.
        assert!(
            deltas[0].abs() * 10.0 <= deltas[6].abs(),
            "duplicate {} vs extreme {}",
            deltas[0],
            deltas[6]
        );
    }

    #[test]
    fn single_effective_row_is_single_class() {
        assert!(matches!(
            loo_retrain_oracle(&[vec![1.0]], &[1.0], &[vec![1.0]], &[1.0], 1e-2, 1e-8, 50),
            Err(InfluenceError::SingleClass)
        ));
    }

    /// Identity provider: a row's importance vector is the row itself.
    struct IdentityProvider;

    impl DatasetLifimProvider for IdentityProvider {
        fn lifims(
            &self,
            data: &TabularDataset,
            _seed: u64,
        ) -> Result<Vec<Vec<f64>>, crate::rashomon::RashomonError> {
            Ok(data.rows().to_vec())
        }

        fn gifim(
            &self,
            data: &TabularDataset,
            _seed: u64,
        ) -> Result<Vec<f64>, crate::rashomon::RashomonError> {
            let m = data.n_features();
            let mut acc = vec![0.0; m];
            for row in data.rows() {
                for (a, v) in acc.iter_mut().zip(row) {
                    *a += v / data.n_rows() as f64;
                }
            }
            Ok(acc)
        }
    }

    fn separable_pair() -> (TabularDataset, TabularDataset) {
        use crate::dataset::parse_csv;
        let mut d_csv = String::from("a,b\n");
        let mut dp_csv = String::from("a,b\n");
        let mut rng = crate::substream(400, 0);
        use rand::Rng;
        for _ in 0..20 {
            d_csv.push_str(&format!(
                "{},{}\n",
                1.0 + rng.random::<f64>(),
                rng.random::<f64>()
            ));
            dp_csv.push_str(&format!(
                "{},{}\n",
                -1.0 - rng.random::<f64>(),
                rng.random::<f64>()
            ));
        }
        (
            parse_csv(&d_csv, None).unwrap(),
            parse_csv(&dp_csv, None).unwrap(),
        )
    }

    #[test]
    fn selecting_every_row_is_an_empty_remainder() {
        let (d, dp) = separable_pair();
        let opts = TopKOptions {
            k: dp.n_rows(),
            l2: 1e-2,
            ..TopKOptions::default()
        };
        assert!(matches!(
            top_k_influential(&d, &dp, &IdentityProvider, &opts),
            Err(InfluenceError::EmptyRemainder)
        ));
    }

    #[test]
    fn k_beyond_dataset_is_rejected_before_computation() {
        let (d, dp) = separable_pair();
        let opts = TopKOptions {
            k: dp.n_rows() + 1,
            ..TopKOptions::default()
        };
        assert!(matches!(
            top_k_influential(&d, &dp, &IdentityProvider, &opts),
            Err(InfluenceError::KOutOfRange { .. })
        ));
        let zero = TopKOptions {
            k: 0,
            ..TopKOptions::default()
        };
        assert!(matches!(
            top_k_influential(&d, &dp, &IdentityProvider, &zero),
            Err(InfluenceError::KOutOfRange { .. })
        ));
    }

    #[test]
    fn report_serializes_documented_fields_and_csv() {
        let (d, dp) = separable_pair();
        let opts = TopKOptions {
            k: 3,
            l2: 1e-2,
            ..TopKOptions::default()
        };
        let report = top_k_influential(&d, &dp, &IdentityProvider, &opts).unwrap();
        assert_eq!(report.selected_ids.len(), 3);
        let json = report.to_json();
        for key in [
            "scores",
            "selected_ids",
            "alignment",
            "discriminator_accuracy",
            "gifim_triplet",
        ] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
        let csv = report.to_csv();
        assert!(csv.starts_with("row_id,score,selected\n"));
        assert_eq!(csv.lines().count(), 1 + d.n_rows() + dp.n_rows());
        let selected_lines = csv.lines().filter(|l| l.ends_with(",1")).count();
        assert_eq!(selected_lines, 3);
    }

    #[test]
    fn fully_separated_importances_are_easy_for_the_discriminator() {
        let (d, dp) = separable_pair();
        let opts = TopKOptions {
            k: 2,
            l2: 1e-2,
            ..TopKOptions::default()
        };
        let report = top_k_influential(&d, &dp, &IdentityProvider, &opts).unwrap();
        assert_eq!(report.discriminator_accuracy, 1.0);
    }

    #[test]
    fn alignment_cases() {
        let g_d = [1.0, 0.0];
        let g_dp = [0.0, 0.0];
        // No removal effect.
        assert_eq!(alignment(&g_d, &g_dp, &g_dp).unwrap(), 0.0);
        // Perfect alignment.
        assert_eq!(alignment(&g_d, &g_dp, &g_d).unwrap(), 1.0);
        // Halfway.
        assert_eq!(alignment(&g_d, &g_dp, &[0.5, 0.0]).unwrap(), 0.5);
        // Identical inputs are rejected.
        assert!(matches!(
            alignment(&g_d, &g_d, &g_dp),
            Err(InfluenceError::IdenticalGifims)
        ));
    }

    #[test]
    fn alignment_is_scale_invariant() {
        let g_d = [1.0, -2.0, 0.5];
        let g_dp = [0.2, 0.3, -0.1];
        let g_s = [0.6, -1.0, 0.2];
        let base = alignment(&g_d, &g_dp, &g_s).unwrap();
        let scale = 7.25;
        let scaled: Vec<Vec<f64>> = [&g_d[..], &g_dp[..], &g_s[..]]
            .iter()
            .map(|v| v.iter().map(|x| x * scale).collect())
            .collect();
        let after = alignment(&scaled[0], &scaled[1], &scaled[2]).unwrap();
        assert!((base - after).abs() < 1e-12);
    }
}
