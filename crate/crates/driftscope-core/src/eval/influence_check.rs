//! Influence validation against the retraining oracle, the planted-shift
//! synthetic, and the removal-fraction alignment sweep.

use super::EvalError;
use crate::dataset::TabularDataset;
use crate::influence::{
    alignment, fit_logistic, influence_scores, loo_retrain_oracle, stacked_influence,
    DatasetLifimProvider, TopKOptions,
};
use crate::linalg::pearson;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Agreement between theoretical influence scores and leave-one-out
/// retraining deltas on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub n: usize,
    pub m: usize,
    pub l2: f64,
    pub seed: Option<u64>,
    /// Pearson correlation; `None` when either side is constant.
    pub pearson: Option<f64>,
    pub sign_agreement: f64,
    pub degenerate: bool,
    pub elapsed_seconds: f64,
}

impl CorrelationReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

/// Generates the seeded two-class synthetic task used by
/// [`validate_influence`]. Each row draws from its own substream, so the
/// first n rows are identical for any larger n with the same seed.
pub fn gen_influence_task(n: usize, m: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for i in 0..n {
        let mut rng = crate::substream(seed, 0x7461_736b_0000 + i as u64);
        let y = f64::from(i % 2 == 0);
        let shift = if y == 1.0 { 0.8 } else { -0.8 };
        let x: Vec<f64> = (0..m)
            .map(|j| {
                if j == 0 {
                    shift + gauss(&mut rng)
                } else {
                    gauss(&mut rng)
                }
            })
            .collect();
        xs.push(x);
        ys.push(y);
    }
    (xs, ys)
}

/// Compares influence scores against the retraining oracle for a model fit
/// on the training rows, measuring loss changes on the held-out test rows.
pub fn validate_influence_on(
    train_x: &[Vec<f64>],
    train_y: &[f64],
    test_x: &[Vec<f64>],
    test_y: &[f64],
    l2: f64,
    seed: Option<u64>,
) -> Result<CorrelationReport, EvalError> {
    let start = std::time::Instant::now();
    let model = fit_logistic(train_x, train_y, l2, 1e-10, 200)?;
    let scores = influence_scores(&model, train_x, train_y, test_x, test_y)?;
    let deltas = loo_retrain_oracle(train_x, train_y, test_x, test_y, l2, 1e-10, 200)?;
    let pearson = pearson(&scores, &deltas);
    let sign_agreement = scores
        .iter()
        .zip(&deltas)
        .filter(|(s, d)| s.signum() == d.signum())
        .count() as f64
        / scores.len() as f64;
    Ok(CorrelationReport {
        n: train_x.len(),
        m: train_x.first().map_or(0, Vec::len),
        l2,
        seed,
        degenerate: pearson.is_none(),
        pearson,
        sign_agreement,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Generates a seeded synthetic two-class task (n training rows plus a
/// same-sized held-out test draw) and validates the influence computation
/// against the retraining oracle.
pub fn validate_influence(
    n: usize,
    m: usize,
    l2: f64,
    seed: u64,
) -> Result<CorrelationReport, EvalError> {
    assert!(n >= 20, "need at least 20 rows for a meaningful check");
    let (train_x, train_y) = gen_influence_task(n, m, seed);
    let (test_x, test_y) = gen_influence_task(n, m, crate::substream_seed(seed, 0x7465_7374));
    validate_influence_on(&train_x, &train_y, &test_x, &test_y, l2, Some(seed))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantedShiftSpec {
    /// Rows per dataset before planting.
    pub n_base: usize,
    /// Fraction of `n_base` planted into D' as culprit rows.
    pub plant_fraction: f64,
    /// Continuous feature count (≥ 3).
    pub m: usize,
    /// Probability of flipping a base row's label.
    pub label_noise: f64,
    pub seed: u64,
}

impl Default for PlantedShiftSpec {
    fn default() -> Self {
        Self {
            n_base: 240,
            plant_fraction: 0.05,
            m: 5,
            label_noise: 0.1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlantedShiftPair {
    pub d: TabularDataset,
    pub d_prime: TabularDataset,
    /// D'-local row indices of the planted culprits.
    pub planted_ids: Vec<usize>,
    pub spec: PlantedShiftSpec,
}

/// Two datasets that agree on the label mechanism except for a small block
/// of planted rows in D'.
///
/// Base rows: feature 0 carries the label signal, the rest is noise. Planted
/// rows sit in an extreme tail of feature 1 with labels contradicting the
/// feature-0 signal, so near-optimal trees on D' recruit feature 1 and the
/// intrinsic importance profile shifts until the plants are removed.
pub fn gen_planted_shift(spec: &PlantedShiftSpec) -> Result<PlantedShiftPair, EvalError> {
    if spec.m < 3 {
        return Err(EvalError::InvalidSpec("need at least 3 features".into()));
    }
    if !(0.0..1.0).contains(&spec.plant_fraction) {
        return Err(EvalError::InvalidSpec(
            "plant_fraction must be in [0, 1)".into(),
        ));
    }
    let n_plants = (spec.n_base as f64 * spec.plant_fraction).ceil() as usize;

    let base_row = |seed: u64, tag: u64, i: usize| -> (Vec<f64>, f64) {
        let mut rng = crate::substream(seed, tag * 1_000_000 + i as u64);
        let y_clean = f64::from(rng.random_bool(0.5));
        let mut x: Vec<f64> = (0..spec.m).map(|_| gauss(&mut rng)).collect();
        x[0] += if y_clean == 1.0 { 1.2 } else { -1.2 };
        let y = if rng.random_bool(spec.label_noise) {
            1.0 - y_clean
        } else {
            y_clean
        };
        (x, y)
    };

    let columns: Vec<String> = (0..spec.m).map(|j| format!("f{j}")).collect();
    let mut rows_d = Vec::with_capacity(spec.n_base);
    let mut labels_d = Vec::with_capacity(spec.n_base);
    for i in 0..spec.n_base {
        let (x, y) = base_row(spec.seed, 1, i);
        rows_d.push(x);
        labels_d.push(y);
    }
    let mut rows_dp = Vec::with_capacity(spec.n_base + n_plants);
    let mut labels_dp = Vec::with_capacity(spec.n_base + n_plants);
    for i in 0..spec.n_base {
        let (x, y) = base_row(spec.seed, 2, i);
        rows_dp.push(x);
        labels_dp.push(y);
    }
    let mut planted_ids = Vec::with_capacity(n_plants);
    for i in 0..n_plants {
        let mut rng = crate::substream(spec.seed, 3_000_000 + i as u64);
        let mut x: Vec<f64> = (0..spec.m).map(|_| gauss(&mut rng)).collect();
        x[0] -= 1.2; // looks like class 0 along the signal feature
        x[1] = 4.0 + 0.5 * gauss(&mut rng); // far tail of a noise feature
        planted_ids.push(rows_dp.len());
        rows_dp.push(x);
        labels_dp.push(1.0);
    }

    let d = TabularDataset::new(columns.clone(), rows_d, Some(labels_d))?;
    let d_prime = TabularDataset::new(columns, rows_dp, Some(labels_dp))?;
    Ok(PlantedShiftPair {
        d,
        d_prime,
        planted_ids,
        spec: *spec,
    })
}

/// Alignment as a function of the removed fraction of D'.
///
/// Scores are computed once; for each fraction the top-ranked rows are
/// removed and the remainder's global importance is recomputed with a fresh
/// seeded ensemble. Returns (fraction, alignment) pairs in input order.
pub fn removal_sweep<P: DatasetLifimProvider>(
    d: &TabularDataset,
    d_prime: &TabularDataset,
    provider: &P,
    fractions: &[f64],
    opts: &TopKOptions,
) -> Result<Vec<(f64, f64)>, EvalError> {
    let stacked = stacked_influence(d, d_prime, provider, opts)?;
    let n_dp = d_prime.n_rows();
    let mut out = Vec::with_capacity(fractions.len());
    for (fi, &fraction) in fractions.iter().enumerate() {
        assert!(
            (0.0..1.0).contains(&fraction) || fraction == 0.0 || fraction < 1.0,
            "fractions must be in [0, 1)"
        );
        let k = ((n_dp as f64 * fraction).ceil() as usize).clamp(1, n_dp - 1);
        let selected: std::collections::HashSet<usize> =
            stacked.dp_ranking[..k].iter().copied().collect();
        let keep: Vec<usize> = (0..n_dp).filter(|i| !selected.contains(i)).collect();
        let remainder = d_prime.subset(&keep);
        let gifim_dpp = provider.gifim(
            &remainder,
            crate::substream_seed(opts.seed, 1000 + fi as u64),
        )?;
        let a = alignment(&stacked.gifim_d, &stacked.gifim_dp, &gifim_dpp)?;
        out.push((fraction, a));
    }
    Ok(out)
}
