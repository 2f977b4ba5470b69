//! End-to-end library pipelines over the seeded synthetic generators.

use driftscope_core::dataset::{apply_normalizer, fit_normalizer, Metric};
use driftscope_core::eval::{gen_planted_shift, removal_sweep, MixturePairSpec, PlantedShiftSpec};
use driftscope_core::influence::{
    concat_datasets, stacked_influence, top_k_influential, DatasetLifimProvider,
    RashomonDatasetProvider, TopKOptions,
};
use driftscope_core::linalg::l2_norm;
use driftscope_core::prototype::{neighbourhood_stats, Prototype, Provenance};
use driftscope_core::rashomon::EnsembleParams;

fn pipeline_provider(pair: &driftscope_core::eval::PlantedShiftPair) -> RashomonDatasetProvider {
    let both = concat_datasets(&pair.d, &pair.d_prime).expect("matching schemas");
    RashomonDatasetProvider::fit(
        &both,
        2,
        EnsembleParams {
            bootstraps: 8,
            candidates_per_bootstrap: 4,
            ..EnsembleParams::default()
        },
        64,
    )
    .expect("labeled data")
    .with_shared_background(&pair.d, 7)
    .expect("same schema")
}

#[test]
fn planted_culprits_dominate_the_top_influence_slots() {
    let mut total_recovery = 0.0;
    for seed in 0..10u64 {
        let pair = gen_planted_shift(&PlantedShiftSpec {
            seed,
            ..PlantedShiftSpec::default()
        })
        .expect("valid spec");
        let provider = pipeline_provider(&pair);
        let opts = TopKOptions {
            k: 1,
            l2: 1e-2,
            seed,
            ..TopKOptions::default()
        };
        let stacked = stacked_influence(&pair.d, &pair.d_prime, &provider, &opts).unwrap();
        let k = (pair.d_prime.n_rows() as f64 * 0.05).ceil() as usize;
        let top: std::collections::HashSet<usize> =
            stacked.dp_ranking[..k].iter().copied().collect();
        let hits = pair
            .planted_ids
            .iter()
            .filter(|id| top.contains(id))
            .count();
        total_recovery += hits as f64 / pair.planted_ids.len() as f64;
    }
    let mean = total_recovery / 10.0;
    assert!(mean >= 0.6, "mean planted recovery {mean}");
}

#[test]
fn duplicated_distribution_shows_no_spurious_signal() {
    // Same generator for both sides (no plants): the discriminator should
    // sit at chance and removal should not move the global importance gap
    // by more than a tenth of the per-row attribution scale.
    for seed in 0..10u64 {
        let pair = gen_planted_shift(&PlantedShiftSpec {
            plant_fraction: 0.0,
            seed,
            ..PlantedShiftSpec::default()
        })
        .unwrap();
        let provider = pipeline_provider(&pair);
        let k = (pair.d_prime.n_rows() as f64 * 0.05).ceil() as usize;
        let opts = TopKOptions {
            k,
            l2: 0.1,
            seed,
            ..TopKOptions::default()
        };
        let report = top_k_influential(&pair.d, &pair.d_prime, &provider, &opts).unwrap();
        assert!(
            (report.discriminator_accuracy - 0.5).abs() <= 0.05,
            "seed {seed}: accuracy {}",
            report.discriminator_accuracy
        );
        let lifims = provider
            .lifims(&pair.d, driftscope_core::substream_seed(seed, 1))
            .unwrap();
        let row_scale: f64 = lifims.iter().map(|r| l2_norm(r)).sum::<f64>() / lifims.len() as f64;
        let gap_change = (report.gap_after - report.gap_before).abs();
        assert!(
            gap_change <= 0.1 * row_scale,
            "seed {seed}: gap change {gap_change} vs scale {row_scale}"
        );
    }
}

#[test]
fn alignment_curve_rises_then_falls() {
    let fractions = [0.01, 0.025, 0.05, 0.1, 0.2, 0.4, 0.6, 0.8, 0.95];
    let mut mean_curve = vec![0.0; fractions.len()];
    let seeds = 3u64;
    for seed in 0..seeds {
        let pair = gen_planted_shift(&PlantedShiftSpec {
            seed,
            ..PlantedShiftSpec::default()
        })
        .unwrap();
        let provider = pipeline_provider(&pair);
        let opts = TopKOptions {
            k: 1,
            l2: 1e-2,
            seed,
            ..TopKOptions::default()
        };
        let curve = removal_sweep(&pair.d, &pair.d_prime, &provider, &fractions, &opts).unwrap();
        for (slot, (_, a)) in mean_curve.iter_mut().zip(&curve) {
            *slot += a / seeds as f64;
        }
    }
    let argmax = mean_curve
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    assert!(argmax < fractions.len() - 1, "curve {mean_curve:?}");
    assert!(mean_curve[argmax] > 0.0, "curve {mean_curve:?}");
}

#[test]
fn mixture_pair_feeds_prototype_stats_end_to_end() {
    // Generated pair → ground-truth centers as prototypes → NSPD matches
    // the proportion gaps. The comparison runs in the generator's raw space;
    // per-axis z-scoring would distort the shared angular geometry.
    let (x, y, truth) = driftscope_core::eval::gen_circle_mixture_pair(
        &MixturePairSpec::case1_x(5),
        &MixturePairSpec::case2_y(6),
    )
    .unwrap();
    let prototypes: Vec<Prototype> = truth
        .centers_x
        .iter()
        .enumerate()
        .map(|(id, c)| Prototype {
            id,
            features: vec![c[0], c[1]],
            label: None,
            provenance: Provenance::Manual,
        })
        .collect();
    let stats = neighbourhood_stats(&prototypes, &x, &y, Metric::Euclidean).unwrap();
    let tolerance = 3.0 / (y.n_rows() as f64).sqrt();
    for (row, pi) in stats.per_prototype.iter().zip(&truth.proportions_y) {
        let expected = 1.0 / 6.0 - pi;
        assert!(
            (row.nspd - expected).abs() <= tolerance,
            "prototype {}: nspd {} vs expected {}",
            row.prototype_id,
            row.nspd,
            expected
        );
    }
    // Normalization round-trips cleanly on the generated data.
    let norm = fit_normalizer(&x).unwrap();
    let nx = apply_normalizer(&norm, &x).unwrap();
    assert_eq!(nx.n_rows(), x.n_rows());
}
