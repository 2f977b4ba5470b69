//! Supervised threshold binarization.
//!
//! Continuous columns are converted to indicator features "col ≤ t". For
//! each column the candidate thresholds are midpoints between consecutive
//! sorted unique values; the candidates with the highest information gain
//! against the label are retained, ties broken toward the smaller threshold.

use super::{ColumnKind, DatasetError, TabularDataset};
use serde::{Deserialize, Serialize};

/// One derived indicator: `1` when `source column value ≤ threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRule {
    pub column: String,
    pub threshold: f64,
}

impl ThresholdRule {
    pub fn derived_name(&self) -> String {
        format!("{} ≤ {}", self.column, self.threshold)
    }
}

/// Ordered thresholds per source column plus the binary columns that pass
/// through untouched. Applying the scheme is deterministic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarizationScheme {
    /// Grouped by source column in dataset order; thresholds strictly
    /// increasing within a column.
    pub rules: Vec<ThresholdRule>,
    /// Names of source binary columns that carry over unchanged.
    pub pass_through: Vec<String>,
}

impl BinarizationScheme {
    /// Column names of the binarized feature space, in output order.
    pub fn output_columns(&self, source_columns: &[String]) -> Vec<String> {
        let mut out = Vec::new();
        for name in source_columns {
            let mut had_rule = false;
            for rule in self.rules.iter().filter(|r| &r.column == name) {
                out.push(rule.derived_name());
                had_rule = true;
            }
            if !had_rule && self.pass_through.iter().any(|p| p == name) {
                out.push(name.clone());
            }
        }
        out
    }

    /// Maps a raw feature vector (in `source_columns` order) into the
    /// binarized space.
    pub fn apply_row(&self, source_columns: &[String], row: &[f64]) -> Vec<f64> {
        let mut out = Vec::new();
        for (j, name) in source_columns.iter().enumerate() {
            let mut had_rule = false;
            for rule in self.rules.iter().filter(|r| &r.column == name) {
                out.push(if row[j] <= rule.threshold { 1.0 } else { 0.0 });
                had_rule = true;
            }
            if !had_rule && self.pass_through.iter().any(|p| p == name) {
                out.push(row[j]);
            }
        }
        out
    }

    /// For each output column, the index of its source column. Used to
    /// aggregate attributions of derived features back onto the original
    /// columns.
    pub fn source_indices(&self, source_columns: &[String]) -> Vec<usize> {
        let mut out = Vec::new();
        for (j, name) in source_columns.iter().enumerate() {
            let mut had_rule = false;
            for _ in self.rules.iter().filter(|r| &r.column == name) {
                out.push(j);
                had_rule = true;
            }
            if !had_rule && self.pass_through.iter().any(|p| p == name) {
                out.push(j);
            }
        }
        out
    }
}

fn entropy(pos: f64, total: f64) -> f64 {
    if total == 0.0 {
        return 0.0;
    }
    let p = pos / total;
    let mut h = 0.0;
    if p > 0.0 {
        h -= p * p.log2();
    }
    if p < 1.0 {
        h -= (1.0 - p) * (1.0 - p).log2();
    }
    h
}

/// Information gain of splitting `values ≤ t` against binary labels.
fn information_gain(values: &[f64], labels: &[f64], t: f64) -> f64 {
    let n = values.len() as f64;
    let pos: f64 = labels.iter().sum();
    let parent = entropy(pos, n);
    let mut left_n = 0.0;
    let mut left_pos = 0.0;
    for (v, y) in values.iter().zip(labels) {
        if *v <= t {
            left_n += 1.0;
            left_pos += y;
        }
    }
    let right_n = n - left_n;
    let right_pos = pos - left_pos;
    parent - (left_n / n) * entropy(left_pos, left_n) - (right_n / n) * entropy(right_pos, right_n)
}

/// Chooses the top information-gain thresholds per continuous column.
///
/// Labels are required; binary and constant columns emit no thresholds.
pub fn fit_binarizer(
    data: &TabularDataset,
    max_thresholds_per_column: usize,
) -> Result<BinarizationScheme, DatasetError> {
    assert!(
        max_thresholds_per_column >= 1,
        "need at least one threshold per column"
    );
    let labels = data.labels().ok_or(DatasetError::UnlabeledDataset)?;
    let mut rules = Vec::new();
    let mut pass_through = Vec::new();
    for (j, name) in data.columns().iter().enumerate() {
        if data.kinds()[j] == ColumnKind::Binary {
            pass_through.push(name.clone());
            continue;
        }
        let values = data.column_values(j);
        let mut unique = values.clone();
        unique.sort_by(|a, b| a.partial_cmp(b).expect("NaN feature value"));
        unique.dedup();
        if unique.len() < 2 {
            continue;
        }
        let mut candidates: Vec<(f64, f64)> = unique
            .windows(2)
            .map(|w| {
                let t = (w[0] + w[1]) / 2.0;
                (t, information_gain(&values, labels, t))
            })
            .collect();
        // Highest gain first; ties toward the smaller threshold.
        candidates.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .expect("NaN gain")
                .then(a.0.partial_cmp(&b.0).expect("NaN threshold"))
        });
        let mut chosen: Vec<f64> = candidates
            .into_iter()
            .take(max_thresholds_per_column)
            .map(|(t, _)| t)
            .collect();
        chosen.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for t in chosen {
            rules.push(ThresholdRule {
                column: name.clone(),
                threshold: t,
            });
        }
    }
    Ok(BinarizationScheme {
        rules,
        pass_through,
    })
}

/// Applies a scheme to a full dataset, producing a binarized dataset with
/// derived column names and the original labels.
pub fn binarize(
    scheme: &BinarizationScheme,
    data: &TabularDataset,
) -> Result<TabularDataset, DatasetError> {
    let columns = scheme.output_columns(data.columns());
    let rows: Vec<Vec<f64>> = data
        .rows()
        .iter()
        .map(|row| scheme.apply_row(data.columns(), row))
        .collect();
    TabularDataset::new(columns, rows, data.labels().map(<[f64]>::to_vec))
}
