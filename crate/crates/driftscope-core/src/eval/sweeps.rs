//! Faithfulness and coefficient-tradeoff sweeps over partial-prototype
//! selection, plus the seeded synthetic corpus they run on.

use super::metrics::{global_permutation_accuracy, pairwise_euclidean, random_triplet_accuracy};
use super::{EvalError, SweepRecord, SweepResult};
use crate::dataset::TabularDataset;
use crate::linalg::{abs_desc_ranks, variance};
use crate::prototype::{
    delta_neighbourhood, partial_prototypes, DeltaSpec, NeighbourhoodOptions, PartialParams,
    Prototype, Provenance,
};
use crate::rashomon::{LifimPairProvider, RashomonError};
use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Synthetic corpus for the selection sweeps: one prototype at the origin,
/// feature noise that grows with the column index (so value stability
/// discriminates), and a deterministic per-row importance profile in which
/// the strongest features trade places while the weak tail keeps a stable
/// order (so rank stability and absolute rank pull in opposite directions).
pub struct SweepCorpus {
    pub d: TabularDataset,
    pub d_prime: TabularDataset,
    pub prototype: Prototype,
    pub seed: u64,
    strong_pool: usize,
}

/// Number of features whose importance ranks shuffle among themselves.
const STRONG_POOL: usize = 4;

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn gen_side(n: usize, m: usize, seed: u64, tag: u64) -> TabularDataset {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut rng = crate::substream(seed, tag.wrapping_mul(1_000_003) + i as u64);
            (0..m)
                .map(|j| (0.2 + 0.15 * j as f64) * gauss(&mut rng))
                .collect()
        })
        .collect();
    let columns = (0..m).map(|j| format!("f{j}")).collect();
    TabularDataset::new(columns, rows, None).expect("rectangular rows")
}

/// Generates the sweep corpus: `n` rows per side, `m ≥ 6` features.
pub fn gen_sweep_corpus(n: usize, m: usize, seed: u64) -> SweepCorpus {
    assert!(
        m > STRONG_POOL + 1,
        "corpus needs a weak tail beyond the strong pool"
    );
    SweepCorpus {
        d: gen_side(n, m, seed, 1),
        d_prime: gen_side(n, m, seed, 2),
        prototype: Prototype {
            id: 0,
            features: vec![0.0; m],
            label: None,
            provenance: Provenance::Manual,
        },
        seed,
        strong_pool: STRONG_POOL,
    }
}

impl SweepCorpus {
    pub fn n_features(&self) -> usize {
        self.prototype.features.len()
    }

    pub fn provider(&self) -> SweepCorpusProvider<'_> {
        SweepCorpusProvider { corpus: self }
    }

    /// Deterministic importance profile of a row: a pure function of the
    /// feature values. Strong features draw volatile magnitudes from a
    /// row-hashed stream; weak features decay geometrically with mild noise.
    fn importance(&self, x: &[f64]) -> Vec<f64> {
        let mut h = self.seed ^ 0x696d_706f;
        for v in x {
            h = crate::substream_seed(h, v.to_bits());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(h);
        let m = x.len();
        (0..m)
            .map(|j| {
                let u: f64 = rng.random::<f64>();
                if j < self.strong_pool {
                    10.0 * (0.5 + u)
                } else {
                    let rank_pos = (j - self.strong_pool) as f64;
                    0.9_f64.powf(rank_pos) * 0.2 * (1.0 + 0.1 * u)
                }
            })
            .collect()
    }
}

pub struct SweepCorpusProvider<'a> {
    corpus: &'a SweepCorpus,
}

impl LifimPairProvider for SweepCorpusProvider<'_> {
    fn n_source_features(&self) -> usize {
        self.corpus.n_features()
    }

    fn lifim_d(&self, x: &[f64]) -> Result<Vec<f64>, RashomonError> {
        Ok(self.corpus.importance(x))
    }

    fn lifim_dp(&self, x: &[f64]) -> Result<Vec<f64>, RashomonError> {
        Ok(self.corpus.importance(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    /// Value-stability scoring (c1 = c2 = 0).
    Scored,
    /// K features drawn uniformly, the baseline.
    Random,
}

impl Selection {
    fn label(self) -> &'static str {
        match self {
            Selection::Scored => "scored",
            Selection::Random => "random",
        }
    }
}

fn scored_selection(corpus: &SweepCorpus, k: usize) -> Result<Vec<usize>, EvalError> {
    let params = PartialParams {
        k,
        c1: 0.0,
        c2: 0.0,
        c3: 1.0,
        delta: DeltaSpec::Percentile(100.0),
        delta_dp: Some(DeltaSpec::Percentile(100.0)),
        opts: NeighbourhoodOptions::default(),
    };
    let partials = partial_prototypes(
        std::slice::from_ref(&corpus.prototype),
        &corpus.d,
        &corpus.d_prime,
        &params,
        None,
    )?;
    Ok(partials[0].selected.iter().map(|s| s.index).collect())
}

fn random_selection(m: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut rng = crate::substream(seed, 0x72616e64);
    let mut chosen = sample(&mut rng, m, k).into_vec();
    chosen.sort_unstable();
    chosen
}

fn restricted_distance(a: &[f64], b: &[f64], selected: &[usize]) -> f64 {
    selected
        .iter()
        .map(|&j| (a[j] - b[j]) * (a[j] - b[j]))
        .sum::<f64>()
        .sqrt()
}

/// Faithfulness of partial-prototype selection as K shrinks.
///
/// For each K and seed the neighbourhood of the prototype is ordered by
/// full-feature distance and by restricted distance; the sweep records the
/// triplet and permutation accuracies between the two orderings plus the
/// mean within-neighbourhood variance of the selected features.
pub fn faithfulness_sweep(
    corpus: &SweepCorpus,
    k_values: &[usize],
    selection: Selection,
    seeds: &[u64],
    n_trials: usize,
) -> Result<SweepResult, EvalError> {
    let m = corpus.n_features();
    let points = corpus.d.rows();
    let full_pairwise = pairwise_euclidean(points);
    let full_anchor: Vec<f64> = points
        .iter()
        .map(|r| restricted_distance(r, &corpus.prototype.features, &(0..m).collect::<Vec<_>>()))
        .collect();

    let mut records = Vec::new();
    for &k in k_values {
        assert!(k >= 1 && k <= m, "K must be in 1..=M");
        for &seed in seeds {
            let selected = match selection {
                Selection::Scored => scored_selection(corpus, k)?,
                Selection::Random => random_selection(m, k, crate::substream_seed(seed, k as u64)),
            };
            let partial_anchor: Vec<f64> = points
                .iter()
                .map(|r| restricted_distance(r, &corpus.prototype.features, &selected))
                .collect();
            let rta = random_triplet_accuracy(
                points.len(),
                |i, j| full_pairwise[i][j],
                |i, j| restricted_distance(&points[i], &points[j], &selected),
                n_trials,
                crate::substream_seed(seed, 0x74_7269),
            )?;
            let gpa = global_permutation_accuracy(&full_anchor, &partial_anchor)?;
            let value_variance = selected
                .iter()
                .map(|&j| variance(&corpus.d.column_values(j)))
                .sum::<f64>()
                / selected.len() as f64;
            let mut record = SweepRecord::blank(k, seed, selection.label());
            record.rta = Some(rta);
            record.gpa = Some(gpa);
            record.value_variance = Some(value_variance);
            records.push(record);
        }
    }
    Ok(SweepResult {
        records,
        seed: seeds.first().copied().unwrap_or(0),
    })
}

/// Log-uniform draw in [lo, hi].
fn log_uniform(lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.random::<f64>();
    (lo.ln() + u * (hi.ln() - lo.ln())).exp()
}

/// Sweeps random (c1, c2, c3) weightings of the selection score.
///
/// For every sampled triple and every K in `k_set`, the selected features'
/// mean rank difference, mean absolute rank, and mean value deviation are
/// measured over the δ-neighbourhood, exposing the tradeoff between rank
/// stability and average importance.
pub fn tradeoff_sweep(
    corpus: &SweepCorpus,
    n_samples: usize,
    c_range: (f64, f64),
    k_set: &[usize],
    delta_percentile: f64,
    seed: u64,
) -> Result<SweepResult, EvalError> {
    assert!(n_samples >= 1, "need at least one sample");
    let provider = corpus.provider();
    let opts = NeighbourhoodOptions::default();
    let prototype = &corpus.prototype;

    // Neighbourhood resolved once: δ is the given percentile of D-side
    // distances, reused on both sides.
    let radius = DeltaSpec::Percentile(delta_percentile).resolve(prototype, &corpus.d, &opts)?;
    let idx_d = delta_neighbourhood(prototype, &corpus.d, DeltaSpec::Absolute(radius), &opts)?;
    let idx_dp = delta_neighbourhood(
        prototype,
        &corpus.d_prime,
        DeltaSpec::Absolute(radius),
        &opts,
    )?;
    let ranks_p = abs_desc_ranks(&corpus.importance(&prototype.features));

    let mut records = Vec::new();
    for s in 0..n_samples {
        let mut rng = crate::substream(seed, 0x6377 ^ (s as u64) << 8);
        let c1 = log_uniform(c_range.0, c_range.1, &mut rng);
        let c2 = log_uniform(c_range.0, c_range.1, &mut rng);
        let c3 = log_uniform(c_range.0, c_range.1, &mut rng);
        for &k in k_set {
            let params = PartialParams {
                k,
                c1,
                c2,
                c3,
                delta: DeltaSpec::Absolute(radius),
                delta_dp: Some(DeltaSpec::Absolute(radius)),
                opts,
            };
            let partials = partial_prototypes(
                std::slice::from_ref(prototype),
                &corpus.d,
                &corpus.d_prime,
                &params,
                Some(&provider),
            )?;
            let selected: Vec<usize> = partials[0].selected.iter().map(|f| f.index).collect();

            // Metrics of the selected features over both neighbourhoods.
            let mut rank_diff = 0.0;
            let mut abs_rank = 0.0;
            let mut value_dev = 0.0;
            let mut terms = 0usize;
            for (data, idx) in [(&corpus.d, &idx_d), (&corpus.d_prime, &idx_dp)] {
                for &i in idx.iter() {
                    let row = data.row(i);
                    let ranks_n = abs_desc_ranks(&corpus.importance(row));
                    for &j in &selected {
                        rank_diff += (ranks_p[j] as f64 - ranks_n[j] as f64).abs();
                        abs_rank += 0.5 * ranks_p[j] as f64 + 0.5 * ranks_n[j] as f64;
                        value_dev += (prototype.features[j] - row[j]).abs();
                        terms += 1;
                    }
                }
            }
            let scale = terms.max(1) as f64;
            let mut record = SweepRecord::blank(k, seed, "tradeoff");
            record.c1 = Some(c1);
            record.c2 = Some(c2);
            record.c3 = Some(c3);
            record.mean_rank_difference = Some(rank_diff / scale);
            record.mean_absolute_rank = Some(abs_rank / scale);
            record.mean_value_deviation = Some(value_dev / scale);
            records.push(record);
        }
    }
    Ok(SweepResult { records, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pearson;

    #[test]
    fn full_k_is_perfectly_faithful() {
        let corpus = gen_sweep_corpus(60, 8, 3);
        let result = faithfulness_sweep(&corpus, &[8], Selection::Scored, &[0], 500).unwrap();
        assert_eq!(result.records[0].rta, Some(1.0));
        assert_eq!(result.records[0].gpa, Some(1.0));
    }

    #[test]
    fn scored_variance_beats_random_on_average() {
        let corpus = gen_sweep_corpus(80, 8, 11);
        let seeds: Vec<u64> = (0..10).collect();
        for k in [2usize, 4] {
            let scored = faithfulness_sweep(&corpus, &[k], Selection::Scored, &seeds, 200).unwrap();
            let random = faithfulness_sweep(&corpus, &[k], Selection::Random, &seeds, 200).unwrap();
            let mean = |r: &SweepResult| r.mean_where(|_| true, |rec| rec.value_variance).unwrap();
            assert!(
                mean(&scored) <= mean(&random),
                "k={k}: scored {} vs random {}",
                mean(&scored),
                mean(&random)
            );
        }
    }

    #[test]
    fn rta_degrades_from_full_to_single_feature() {
        let corpus = gen_sweep_corpus(80, 8, 5);
        let seeds: Vec<u64> = (0..10).collect();
        let result = faithfulness_sweep(&corpus, &[1, 8], Selection::Scored, &seeds, 400).unwrap();
        let mean_at = |k: usize| {
            result
                .mean_where(|r| r.k == k, |r| r.rta)
                .expect("records exist")
        };
        assert!(
            mean_at(8) >= mean_at(1),
            "rta(8)={} rta(1)={}",
            mean_at(8),
            mean_at(1)
        );
    }

    #[test]
    fn collapsed_c_range_gives_identical_metrics() {
        let corpus = gen_sweep_corpus(50, 8, 7);
        let result = tradeoff_sweep(&corpus, 4, (1.0, 1.0), &[3], 50.0, 9).unwrap();
        let first = &result.records[0];
        for r in &result.records {
            assert_eq!(r.mean_rank_difference, first.mean_rank_difference);
            assert_eq!(r.mean_absolute_rank, first.mean_absolute_rank);
            assert_eq!(r.mean_value_deviation, first.mean_value_deviation);
        }
    }

    #[test]
    fn rank_tradeoff_correlation_is_negative() {
        let corpus = gen_sweep_corpus(120, 10, 2);
        let result = tradeoff_sweep(&corpus, 120, (1e-2, 10.0), &[3, 4, 5], 10.0, 4).unwrap();
        let xs: Vec<f64> = result
            .records
            .iter()
            .filter_map(|r| r.mean_absolute_rank)
            .collect();
        let ys: Vec<f64> = result
            .records
            .iter()
            .filter_map(|r| r.mean_rank_difference)
            .collect();
        let r = pearson(&xs, &ys).expect("variation across samples");
        assert!(r < 0.0, "correlation {r}");
    }

    #[test]
    fn sweep_csv_has_one_row_per_record() {
        let corpus = gen_sweep_corpus(30, 7, 1);
        let result = faithfulness_sweep(&corpus, &[2, 4], Selection::Random, &[0, 1], 100).unwrap();
        let csv = result.to_csv();
        assert_eq!(csv.lines().count(), 1 + result.records.len());
    }
}
