//! Rashomon-ensemble implementation of the dataset-level importance oracle.

use super::scores::DatasetLifimProvider;
use crate::dataset::{binarize, fit_binarizer, BinarizationScheme, TabularDataset};
use crate::rashomon::{background_sample, build_ensemble, lifim, EnsembleParams, RashomonError};
use rayon::prelude::*;

/// Importance provider that binarizes with a shared threshold scheme, builds
/// a seeded near-optimal tree ensemble per dataset, and attributes with
/// interventional Shapley values. Vectors live in the binarized feature
/// space.
///
/// When a shared background is set, every dataset is attributed against the
/// same reference rows. Paired comparisons want this: a coordinate that only
/// one dataset's rows can reach then gets exactly zero attribution on every
/// other row, instead of a small ensemble-dependent offset.
#[derive(Debug, Clone)]
pub struct RashomonDatasetProvider {
    pub scheme: BinarizationScheme,
    pub columns: Vec<String>,
    pub ensemble: EnsembleParams,
    pub background_cap: usize,
    /// Binarized common background rows; `None` samples each call's
    /// background from its own dataset.
    pub shared_background: Option<Vec<Vec<f64>>>,
}

impl RashomonDatasetProvider {
    /// Fits the shared binarization scheme on `scheme_source` (typically the
    /// concatenation of the two datasets under comparison, so both map into
    /// one feature space).
    pub fn fit(
        scheme_source: &TabularDataset,
        max_thresholds_per_column: usize,
        ensemble: EnsembleParams,
        background_cap: usize,
    ) -> Result<Self, crate::dataset::DatasetError> {
        let scheme = fit_binarizer(scheme_source, max_thresholds_per_column)?;
        Ok(Self {
            scheme,
            columns: scheme_source.columns().to_vec(),
            ensemble,
            background_cap,
            shared_background: None,
        })
    }

    /// Attribute every dataset against a seeded sample of `reference`.
    pub fn with_shared_background(
        mut self,
        reference: &TabularDataset,
        seed: u64,
    ) -> Result<Self, RashomonError> {
        let bin = self.binarized(reference)?;
        self.shared_background = Some(background_sample(&bin, self.background_cap, seed));
        Ok(self)
    }

    /// Names of the binarized feature space the importance vectors live in.
    pub fn feature_names(&self) -> Vec<String> {
        self.scheme.output_columns(&self.columns)
    }

    fn binarized(&self, data: &TabularDataset) -> Result<TabularDataset, RashomonError> {
        if data.columns() != self.columns.as_slice() {
            return Err(RashomonError::NotBinarized);
        }
        binarize(&self.scheme, data).map_err(|_| RashomonError::NotBinarized)
    }
}

impl DatasetLifimProvider for RashomonDatasetProvider {
    fn lifims(&self, data: &TabularDataset, seed: u64) -> Result<Vec<Vec<f64>>, RashomonError> {
        let bin = self.binarized(data)?;
        let params = EnsembleParams {
            seed,
            ..self.ensemble.clone()
        };
        let ensemble = build_ensemble(&bin, &params)?;
        let background = match &self.shared_background {
            Some(rows) => rows.clone(),
            None => background_sample(&bin, self.background_cap, seed),
        };
        bin.rows()
            .par_iter()
            .map(|row| lifim(&ensemble, row, &background).map(|iv| iv.values))
            .collect()
    }

    fn gifim(&self, data: &TabularDataset, seed: u64) -> Result<Vec<f64>, RashomonError> {
        let per_row = self.lifims(data, seed)?;
        let m = per_row[0].len();
        let mut acc = vec![0.0; m];
        for row in &per_row {
            for (a, v) in acc.iter_mut().zip(row) {
                *a += v;
            }
        }
        for a in &mut acc {
            *a /= per_row.len() as f64;
        }
        Ok(acc)
    }
}

/// Concatenates two datasets row-wise (labels included) for fitting shared
/// preprocessing such as the binarization scheme.
pub fn concat_datasets(
    a: &TabularDataset,
    b: &TabularDataset,
) -> Result<TabularDataset, crate::dataset::DatasetError> {
    if a.columns() != b.columns() {
        return Err(crate::dataset::DatasetError::SchemaMismatch(format!(
            "cannot concatenate datasets with columns [{}] and [{}]",
            a.columns().join(", "),
            b.columns().join(", ")
        )));
    }
    let mut rows = a.rows().to_vec();
    rows.extend(b.rows().iter().cloned());
    let labels = match (a.labels(), b.labels()) {
        (Some(la), Some(lb)) => {
            let mut l = la.to_vec();
            l.extend_from_slice(lb);
            Some(l)
        }
        (None, None) => None,
        _ => {
            return Err(crate::dataset::DatasetError::SchemaMismatch(
                "one dataset is labeled and the other is not".into(),
            ))
        }
    };
    TabularDataset::new(a.columns().to_vec(), rows, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::parse_csv;

    fn labeled_pair() -> (TabularDataset, TabularDataset) {
        let mut rng = crate::substream(3, 3);
        use rand::Rng;
        let mut make = |shift: f64, n: usize| {
            let mut csv = String::from("a,b,y\n");
            for _ in 0..n {
                let a: f64 = rng.random::<f64>() * 4.0 - 2.0;
                let b: f64 = rng.random::<f64>() * 4.0 - 2.0 + shift;
                let y = u8::from(a > 0.0) ^ u8::from(rng.random::<f64>() < 0.1);
                csv.push_str(&format!("{a},{b},{y}\n"));
            }
            parse_csv(&csv, Some("y")).unwrap()
        };
        (make(0.0, 40), make(1.0, 40))
    }

    #[test]
    fn provider_is_deterministic_per_seed() {
        let (d, dp) = labeled_pair();
        let both = concat_datasets(&d, &dp).unwrap();
        let provider = RashomonDatasetProvider::fit(
            &both,
            2,
            EnsembleParams {
                bootstraps: 3,
                candidates_per_bootstrap: 2,
                ..EnsembleParams::default()
            },
            32,
        )
        .unwrap();
        let a = provider.lifims(&d, 9).unwrap();
        let b = provider.lifims(&d, 9).unwrap();
        assert_eq!(a, b);
        let ga = provider.gifim(&d, 9).unwrap();
        // gifim is the row mean of lifims.
        let m = a[0].len();
        for j in 0..m {
            let mean: f64 = a.iter().map(|r| r[j]).sum::<f64>() / a.len() as f64;
            assert!((ga[j] - mean).abs() < 1e-15);
        }
    }

    #[test]
    fn concat_requires_matching_schemas() {
        let a = parse_csv("a\n1\n", None).unwrap();
        let b = parse_csv("b\n1\n", None).unwrap();
        assert!(concat_datasets(&a, &b).is_err());
    }
}
