//! Ordering-preservation metrics.

use super::EvalError;
use crate::linalg::argsort;
use rand::Rng;

/// Random Triplet Accuracy between two pairwise-distance sources over the
/// same `n_items` items.
///
/// Samples anchored triplets (i; j, k) and checks whether the sign of
/// d(i,j) − d(i,k) agrees between the two sources. Exact ties count as
/// agreement only when tied in both. A self-comparison scores 1.0; two
/// independent sources score about 0.5.
pub fn random_triplet_accuracy<FA, FB>(
    n_items: usize,
    dist_a: FA,
    dist_b: FB,
    n_trials: usize,
    seed: u64,
) -> Result<f64, EvalError>
where
    FA: Fn(usize, usize) -> f64,
    FB: Fn(usize, usize) -> f64,
{
    if n_items < 3 {
        return Err(EvalError::TooFewItems(n_items));
    }
    let mut rng = crate::substream(seed, 0x72_7461);
    let mut agree = 0usize;
    for _ in 0..n_trials {
        let i = rng.random_range(0..n_items);
        let j = loop {
            let j = rng.random_range(0..n_items);
            if j != i {
                break j;
            }
        };
        let k = loop {
            let k = rng.random_range(0..n_items);
            if k != i && k != j {
                break k;
            }
        };
        let sa = (dist_a(i, j) - dist_a(i, k)).partial_cmp(&0.0);
        let sb = (dist_b(i, j) - dist_b(i, k)).partial_cmp(&0.0);
        if sa == sb {
            agree += 1;
        }
    }
    Ok(agree as f64 / n_trials as f64)
}

/// Global Permutation Accuracy: argsort both arrays (ties toward the lower
/// index) and return the fraction of sorted positions holding the same
/// element id.
pub fn global_permutation_accuracy(dist_a: &[f64], dist_b: &[f64]) -> Result<f64, EvalError> {
    if dist_a.len() != dist_b.len() {
        return Err(EvalError::LengthMismatch(dist_a.len(), dist_b.len()));
    }
    if dist_a.is_empty() {
        return Err(EvalError::TooFewItems(0));
    }
    let order_a = argsort(dist_a);
    let order_b = argsort(dist_b);
    let matches = order_a.iter().zip(&order_b).filter(|(a, b)| a == b).count();
    Ok(matches as f64 / dist_a.len() as f64)
}

/// Dense pairwise euclidean distances; the common adapter for
/// [`random_triplet_accuracy`].
#[allow(clippy::needless_range_loop)]
pub fn pairwise_euclidean(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rows.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = rows[i]
                .iter()
                .zip(&rows[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            out[i][j] = d;
            out[j][i] = d;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn matrix_closure(m: &[Vec<f64>]) -> impl Fn(usize, usize) -> f64 + '_ {
        |i, j| m[i][j]
    }

    #[allow(clippy::needless_range_loop)]
    fn random_symmetric(n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = crate::substream(seed, 77);
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = rng.random::<f64>();
                m[i][j] = v;
                m[j][i] = v;
            }
        }
        m
    }

    #[test]
    fn self_comparison_is_perfect() {
        let m = random_symmetric(12, 1);
        let acc =
            random_triplet_accuracy(12, matrix_closure(&m), matrix_closure(&m), 500, 3).unwrap();
        assert_eq!(acc, 1.0);
    }

    #[test]
    fn full_reversal_scores_zero() {
        let m = random_symmetric(12, 2);
        let acc = random_triplet_accuracy(12, matrix_closure(&m), |i, j| -m[i][j], 500, 3).unwrap();
        assert_eq!(acc, 0.0);
    }

    #[test]
    fn independent_sources_score_half() {
        let a = random_symmetric(40, 3);
        let b = random_symmetric(40, 4);
        let acc =
            random_triplet_accuracy(40, matrix_closure(&a), matrix_closure(&b), 1000, 5).unwrap();
        assert!((acc - 0.5).abs() <= 0.05, "accuracy {acc}");
    }

    #[test]
    fn symmetric_in_its_arguments() {
        let a = random_symmetric(15, 6);
        let b = random_symmetric(15, 7);
        let ab =
            random_triplet_accuracy(15, matrix_closure(&a), matrix_closure(&b), 800, 9).unwrap();
        let ba =
            random_triplet_accuracy(15, matrix_closure(&b), matrix_closure(&a), 800, 9).unwrap();
        assert_eq!(ab, ba);
    }

    #[test]
    fn too_few_items_rejected() {
        assert!(matches!(
            random_triplet_accuracy(2, |_, _| 0.0, |_, _| 0.0, 10, 0),
            Err(EvalError::TooFewItems(2))
        ));
    }

    #[test]
    fn gpa_identity_and_derangement() {
        let a = [0.5, 3.0, 1.0, 2.0];
        assert_eq!(global_permutation_accuracy(&a, &a).unwrap(), 1.0);
        // Cyclic shift of the argsort: element ranked r in `a` is ranked
        // r+1 (mod n) in `b` — a derangement, zero positional matches.
        let b = [1.0, 0.5, 2.0, 3.0];
        assert_eq!(global_permutation_accuracy(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn gpa_length_mismatch_rejected() {
        assert!(matches!(
            global_permutation_accuracy(&[1.0], &[1.0, 2.0]),
            Err(EvalError::LengthMismatch(1, 2))
        ));
    }

    #[test]
    fn gpa_random_baseline_is_one_over_n() {
        let n = 20;
        let mut total = 0.0;
        let trials = 200;
        for seed in 0..trials {
            let mut rng = crate::substream(seed, 13);
            let a: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let b: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            total += global_permutation_accuracy(&a, &b).unwrap();
        }
        let mean = total / trials as f64;
        assert!((mean - 1.0 / n as f64).abs() <= 0.05, "mean {mean}");
    }
}
