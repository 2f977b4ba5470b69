//! Benchmarks for the hot paths: tree attribution, clustering, the Newton
//! solve, and nearest-prototype statistics.

use criterion::{criterion_group, criterion_main, Criterion};
use driftscope_core::dataset::{Metric, TabularDataset};
use driftscope_core::influence::{fit_logistic, influence_scores};
use driftscope_core::prototype::{kmeans_prototypes, neighbourhood_stats};
use driftscope_core::rashomon::{random_tree, shapley_enumeration, tree_shapley};
use rand::Rng;
use std::hint::black_box;

fn binary_rows(n: usize, m: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = driftscope_core::substream(seed, 0xbe);
    (0..n)
        .map(|_| (0..m).map(|_| f64::from(rng.random_bool(0.5))).collect())
        .collect()
}

fn continuous_dataset(n: usize, m: usize, seed: u64) -> TabularDataset {
    let mut rng = driftscope_core::substream(seed, 0xda);
    let rows = (0..n)
        .map(|_| (0..m).map(|_| rng.random::<f64>() * 10.0).collect())
        .collect();
    let columns = (0..m).map(|j| format!("f{j}")).collect();
    TabularDataset::new(columns, rows, None).unwrap()
}

fn bench_tree_shapley(c: &mut Criterion) {
    let mut rng = driftscope_core::substream(1, 0);
    let tree = random_tree(12, 5, &mut rng);
    let background = binary_rows(64, 12, 2);
    let x = &binary_rows(1, 12, 3)[0];
    c.bench_function("tree_shapley_poly_m12_bg64", |b| {
        b.iter(|| tree_shapley(black_box(&tree), black_box(x), black_box(&background)).unwrap())
    });
    let small_tree = random_tree(8, 4, &mut rng);
    let small_bg = binary_rows(16, 8, 4);
    let small_x = &binary_rows(1, 8, 5)[0];
    c.bench_function("tree_shapley_enumeration_m8_bg16", |b| {
        b.iter(|| {
            shapley_enumeration(
                black_box(&small_tree),
                black_box(small_x),
                black_box(&small_bg),
            )
            .unwrap()
        })
    });
}

fn bench_kmeans(c: &mut Criterion) {
    let data = continuous_dataset(500, 8, 6);
    c.bench_function("kmeans_n500_m8_k5", |b| {
        b.iter(|| kmeans_prototypes(black_box(&data), 5, 7, 100).unwrap())
    });
}

fn bench_logistic(c: &mut Criterion) {
    let mut rng = driftscope_core::substream(8, 0);
    let features: Vec<Vec<f64>> = (0..500)
        .map(|i| {
            let shift = if i % 2 == 0 { 0.8 } else { -0.8 };
            (0..10)
                .map(|j| {
                    let noise: f64 = rng.random::<f64>() * 2.0 - 1.0;
                    if j == 0 {
                        shift + noise
                    } else {
                        noise
                    }
                })
                .collect()
        })
        .collect();
    let labels: Vec<f64> = (0..500).map(|i| f64::from(i % 2 == 0)).collect();
    c.bench_function("newton_logistic_n500_m10", |b| {
        b.iter(|| fit_logistic(black_box(&features), black_box(&labels), 1e-2, 1e-8, 100).unwrap())
    });
    let model = fit_logistic(&features, &labels, 1e-2, 1e-8, 100).unwrap();
    c.bench_function("influence_scores_n500_m10", |b| {
        b.iter(|| {
            influence_scores(
                black_box(&model),
                black_box(&features),
                black_box(&labels),
                black_box(&features),
                black_box(&labels),
            )
            .unwrap()
        })
    });
}

fn bench_neighbourhood(c: &mut Criterion) {
    let d = continuous_dataset(1000, 6, 11);
    let dp = continuous_dataset(1000, 6, 12);
    let prototypes = kmeans_prototypes(&d, 9, 3, 100).unwrap();
    c.bench_function("neighbourhood_stats_n1000x2_p9", |b| {
        b.iter(|| {
            neighbourhood_stats(
                black_box(&prototypes),
                black_box(&d),
                black_box(&dp),
                Metric::Euclidean,
            )
            .unwrap()
        })
    });
}

criterion_group!(
    benches,
    bench_tree_shapley,
    bench_kmeans,
    bench_logistic,
    bench_neighbourhood
);
criterion_main!(benches);
