//! Seeded k-means prototypes: k-means++ initialization followed by Lloyd
//! iterations. Single-threaded on purpose — the result is bit-reproducible
//! for a fixed seed regardless of worker configuration.

use super::{Prototype, PrototypeError, Provenance};
use crate::dataset::TabularDataset;
use rand::Rng;

/// Cluster centers of `data` as prototypes.
///
/// Ties in nearest-center assignment go to the lowest center id; an empty
/// cluster keeps its previous center. Expects normalized data (the caller
/// owns the normalization convention).
pub fn kmeans_prototypes(
    data: &TabularDataset,
    k: usize,
    seed: u64,
    max_iter: usize,
) -> Result<Vec<Prototype>, PrototypeError> {
    let n = data.n_rows();
    assert!(k >= 1, "k must be at least 1");
    if k > n {
        return Err(PrototypeError::TooFewRows { k, n });
    }
    let m = data.n_features();
    let rows = data.rows();
    let mut rng = crate::substream(seed, 0x6b6d_6561_6e73);

    // k-means++ seeding: squared-distance-weighted draws.
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    centers.push(rows[rng.random_range(0..n)].clone());
    let mut d2: Vec<f64> = rows.iter().map(|r| sq_dist(r, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total <= 0.0 {
            // All remaining mass on already-chosen points (duplicates);
            // deterministically pick the first row not yet chosen.
            (0..n)
                .find(|i| !centers.iter().any(|c| c == &rows[*i]))
                .unwrap_or(0)
        } else {
            let mut u = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if u < w {
                    pick = i;
                    break;
                }
                u -= w;
            }
            pick
        };
        centers.push(rows[next].clone());
        for (i, row) in rows.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(row, centers.last().unwrap()));
        }
    }

    // Lloyd iterations.
    let mut assignment = vec![usize::MAX; n];
    for _ in 0..max_iter {
        let mut changed = false;
        for (i, row) in rows.iter().enumerate() {
            let mut best = (f64::INFINITY, 0usize);
            for (c, center) in centers.iter().enumerate() {
                let d = sq_dist(row, center);
                if d < best.0 {
                    best = (d, c);
                }
            }
            if assignment[i] != best.1 {
                assignment[i] = best.1;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; m]; k];
        let mut counts = vec![0usize; k];
        for (i, row) in rows.iter().enumerate() {
            counts[assignment[i]] += 1;
            for (s, v) in sums[assignment[i]].iter_mut().zip(row) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for (j, s) in sums[c].iter().enumerate() {
                    centers[c][j] = s / counts[c] as f64;
                }
            }
        }
    }

    Ok(centers
        .into_iter()
        .enumerate()
        .map(|(id, features)| Prototype {
            id,
            features,
            label: None,
            provenance: Provenance::Kmeans,
        })
        .collect())
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::parse_csv;
    use rand::Rng;

    #[test]
    fn single_cluster_is_columnwise_mean() {
        let data = parse_csv("a,b\n1,2\n3,4\n5,0\n", None).unwrap();
        let protos = kmeans_prototypes(&data, 1, 7, 100).unwrap();
        assert_eq!(protos.len(), 1);
        assert!((protos[0].features[0] - 3.0).abs() < 1e-12);
        assert!((protos[0].features[1] - 2.0).abs() < 1e-12);
        assert_eq!(protos[0].provenance, Provenance::Kmeans);
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn two_separated_clouds_recovered() {
        let mut rng = crate::substream(99, 0);
        let mut csv = String::from("x,y\n");
        let mut sums = [(0.0, 0.0); 2];
        for cloud in 0..2 {
            let (cx, cy) = if cloud == 0 { (0.0, 0.0) } else { (10.0, 10.0) };
            for _ in 0..40 {
                let px = cx + rng.random::<f64>() - 0.5;
                let py = cy + rng.random::<f64>() - 0.5;
                sums[cloud].0 += px / 40.0;
                sums[cloud].1 += py / 40.0;
                csv.push_str(&format!("{px},{py}\n"));
            }
        }
        let data = parse_csv(&csv, None).unwrap();
        let protos = kmeans_prototypes(&data, 2, 3, 200).unwrap();
        // Each cloud mean must be within 0.5 of some center.
        for (sx, sy) in sums {
            let close = protos.iter().any(|p| {
                ((p.features[0] - sx).powi(2) + (p.features[1] - sy).powi(2)).sqrt() < 0.5
            });
            assert!(close, "no center near cloud mean ({sx}, {sy})");
        }
    }

    #[test]
    fn k_equals_n_makes_every_point_a_prototype() {
        let data = parse_csv("a,b\n0,0\n5,5\n9,1\n", None).unwrap();
        let protos = kmeans_prototypes(&data, 3, 11, 100).unwrap();
        for row in data.rows() {
            assert!(protos.iter().any(|p| &p.features == row));
        }
    }

    #[test]
    fn k_above_n_is_rejected() {
        let data = parse_csv("a\n1\n2\n", None).unwrap();
        assert!(matches!(
            kmeans_prototypes(&data, 3, 0, 10),
            Err(PrototypeError::TooFewRows { k: 3, n: 2 })
        ));
    }

    #[test]
    fn fixed_seed_is_bit_reproducible() {
        let mut rng = crate::substream(5, 5);
        let mut csv = String::from("x,y\n");
        for _ in 0..30 {
            csv.push_str(&format!(
                "{},{}\n",
                rng.random::<f64>(),
                rng.random::<f64>()
            ));
        }
        let data = parse_csv(&csv, None).unwrap();
        let a = kmeans_prototypes(&data, 4, 12, 50).unwrap();
        let b = kmeans_prototypes(&data, 4, 12, 50).unwrap();
        assert_eq!(a, b);
    }
}
