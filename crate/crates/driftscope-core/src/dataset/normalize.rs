//! Reference-dataset z-scoring.
//!
//! Continuous columns are mapped to (x − mean) / std with statistics taken
//! from a designated reference dataset. Binary columns and zero-variance
//! columns pass through unchanged. The standard deviation uses the
//! population convention (divide by N).

use super::{ColumnKind, DatasetError, TabularDataset};
use serde::{Deserialize, Serialize};

/// One column's normalization record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub name: String,
    pub mean: f64,
    pub std: f64,
    /// Binary columns and zero-variance columns are left untouched.
    pub pass_through: bool,
    /// Set when a continuous column had zero variance in the reference.
    pub zero_variance: bool,
}

/// Per-column statistics of the reference dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationStats {
    pub reference: String,
    pub columns: Vec<ColumnStats>,
}

impl NormalizationStats {
    pub fn column(&self, name: &str) -> Option<&ColumnStats> {
        self.columns.iter().find(|c| c.name == name)
    }
}

/// Computes per-column mean/std over the reference dataset.
///
/// Binary columns are marked pass-through; zero-variance continuous columns
/// are marked pass-through with a warning flag.
pub fn fit_normalizer(reference: &TabularDataset) -> Result<NormalizationStats, DatasetError> {
    if reference.n_rows() < 2 {
        return Err(DatasetError::EmptyDataset {
            got: reference.n_rows(),
            need: 2,
        });
    }
    let n = reference.n_rows() as f64;
    let columns = reference
        .columns()
        .iter()
        .enumerate()
        .map(|(j, name)| {
            if reference.kinds()[j] == ColumnKind::Binary {
                return ColumnStats {
                    name: name.clone(),
                    mean: 0.0,
                    std: 1.0,
                    pass_through: true,
                    zero_variance: false,
                };
            }
            let values = reference.column_values(j);
            let mean = values.iter().sum::<f64>() / n;
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            let std = var.sqrt();
            if std == 0.0 {
                ColumnStats {
                    name: name.clone(),
                    mean,
                    std: 1.0,
                    pass_through: true,
                    zero_variance: true,
                }
            } else {
                ColumnStats {
                    name: name.clone(),
                    mean,
                    std,
                    pass_through: false,
                    zero_variance: false,
                }
            }
        })
        .collect();
    Ok(NormalizationStats {
        reference: "reference".to_string(),
        columns,
    })
}

fn check_schema(stats: &NormalizationStats, data: &TabularDataset) -> Result<(), DatasetError> {
    if stats.columns.len() != data.n_features()
        || stats
            .columns
            .iter()
            .zip(data.columns())
            .any(|(s, c)| &s.name != c)
    {
        return Err(DatasetError::SchemaMismatch(format!(
            "normalizer columns [{}] do not match dataset columns [{}]",
            stats
                .columns
                .iter()
                .map(|c| c.name.as_str())
                .collect::<Vec<_>>()
                .join(", "),
            data.columns().join(", ")
        )));
    }
    Ok(())
}

/// Maps continuous columns to (x − mean)/std; pass-through columns are
/// unchanged bit-for-bit.
pub fn apply_normalizer(
    stats: &NormalizationStats,
    data: &TabularDataset,
) -> Result<TabularDataset, DatasetError> {
    check_schema(stats, data)?;
    let rows = data
        .rows()
        .iter()
        .map(|row| {
            row.iter()
                .zip(&stats.columns)
                .map(|(&v, c)| {
                    if c.pass_through {
                        v
                    } else {
                        (v - c.mean) / c.std
                    }
                })
                .collect()
        })
        .collect();
    TabularDataset::new(
        data.columns().to_vec(),
        rows,
        data.labels().map(<[f64]>::to_vec),
    )
}

/// Inverse of [`apply_normalizer`]; recovers inputs to within 1e-12 relative
/// error.
pub fn denormalize(
    stats: &NormalizationStats,
    data: &TabularDataset,
) -> Result<TabularDataset, DatasetError> {
    check_schema(stats, data)?;
    let rows = data
        .rows()
        .iter()
        .map(|row| {
            row.iter()
                .zip(&stats.columns)
                .map(|(&v, c)| {
                    if c.pass_through {
                        v
                    } else {
                        v * c.std + c.mean
                    }
                })
                .collect()
        })
        .collect();
    TabularDataset::new(
        data.columns().to_vec(),
        rows,
        data.labels().map(<[f64]>::to_vec),
    )
}

/// Normalizes a bare feature vector with the same rules as
/// [`apply_normalizer`].
pub fn normalize_vector(stats: &NormalizationStats, v: &[f64]) -> Vec<f64> {
    v.iter()
        .zip(&stats.columns)
        .map(|(&x, c)| {
            if c.pass_through {
                x
            } else {
                (x - c.mean) / c.std
            }
        })
        .collect()
}

/// Maps a normalized feature vector back to original units.
pub fn denormalize_vector(stats: &NormalizationStats, v: &[f64]) -> Vec<f64> {
    v.iter()
        .zip(&stats.columns)
        .map(|(&x, c)| {
            if c.pass_through {
                x
            } else {
                x * c.std + c.mean
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::parse_csv;

    #[test]
    fn population_convention() {
        let data = parse_csv("a\n0\n2\n", None).unwrap();
        let stats = fit_normalizer(&data).unwrap();
        assert_eq!(stats.columns[0].mean, 1.0);
        assert_eq!(stats.columns[0].std, 1.0);
        assert!(!stats.columns[0].pass_through);
    }

    #[test]
    fn binary_columns_pass_through() {
        let data = parse_csv("b\n0\n1\n1\n", None).unwrap();
        let stats = fit_normalizer(&data).unwrap();
        assert!(stats.columns[0].pass_through);
        assert!(!stats.columns[0].zero_variance);
        let normalized = apply_normalizer(&stats, &data).unwrap();
        assert_eq!(normalized.rows(), data.rows());
    }

    #[test]
    fn constant_column_flagged_zero_variance() {
        let data = parse_csv("c\n5\n5\n5\n", None).unwrap();
        let stats = fit_normalizer(&data).unwrap();
        assert!(stats.columns[0].pass_through);
        assert!(stats.columns[0].zero_variance);
    }

    #[test]
    fn single_row_rejected() {
        let data = parse_csv("a\n1.5\n", None).unwrap();
        assert!(matches!(
            fit_normalizer(&data),
            Err(DatasetError::EmptyDataset { got: 1, need: 2 })
        ));
    }

    #[test]
    fn self_normalization_centers_columns() {
        let data = parse_csv("a,b\n1,10\n3,20\n7,40\n9,50\n", None).unwrap();
        let stats = fit_normalizer(&data).unwrap();
        let normalized = apply_normalizer(&stats, &data).unwrap();
        for j in 0..2 {
            let values = normalized.column_values(j);
            let mean: f64 = values.iter().sum::<f64>() / values.len() as f64;
            let var: f64 =
                values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64;
            assert!(mean.abs() <= 1e-12);
            assert!((var.sqrt() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn mean_maps_to_zero() {
        let data = parse_csv("a\n0\n2\n", None).unwrap();
        let stats = fit_normalizer(&data).unwrap();
        let probe = parse_csv("a\n1\n1\n", None).unwrap();
        let normalized = apply_normalizer(&stats, &probe).unwrap();
        assert_eq!(normalized.rows()[0][0], 0.0);
    }

    #[test]
    fn round_trip_recovers_inputs() {
        let data = parse_csv("a,b\n1.25,0\n3.5,1\n-7.75,1\n2.125,0\n", None).unwrap();
        let stats = fit_normalizer(&data).unwrap();
        let there = apply_normalizer(&stats, &data).unwrap();
        let back = denormalize(&stats, &there).unwrap();
        for (orig, rec) in data.rows().iter().zip(back.rows()) {
            for (o, r) in orig.iter().zip(rec) {
                let scale = o.abs().max(1.0);
                assert!((o - r).abs() / scale <= 1e-12);
            }
        }
    }

    #[test]
    fn schema_mismatch_detected() {
        let data = parse_csv("a\n0\n2\n", None).unwrap();
        let stats = fit_normalizer(&data).unwrap();
        let other = parse_csv("z\n0\n2\n", None).unwrap();
        assert!(matches!(
            apply_normalizer(&stats, &other),
            Err(DatasetError::SchemaMismatch(_))
        ));
    }
}
