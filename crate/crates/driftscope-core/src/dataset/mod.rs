//! Tabular data model, CSV ingestion, normalization, binarization, and
//! distance metrics shared by the explanation modules.

mod binarize;
mod distance;
mod normalize;

pub use binarize::{binarize, fit_binarizer, BinarizationScheme, ThresholdRule};
pub use distance::{distance, Metric};
pub use normalize::{
    apply_normalizer, denormalize, denormalize_vector, fit_normalizer, normalize_vector,
    ColumnStats, NormalizationStats,
};

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at row {row}, column \"{column}\": {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },
    #[error("column \"{0}\" not found")]
    MissingColumn(String),
    #[error("label value {value} at row {row} is not in {{0, 1}}")]
    InvalidLabel { row: usize, value: f64 },
    #[error("dataset has too few rows ({got}, need at least {need})")]
    EmptyDataset { got: usize, need: usize },
    #[error("dataset is not labeled")]
    UnlabeledDataset,
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("vectors have different lengths ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("cosine distance is undefined for two zero vectors")]
    ZeroVector,
}

/// Per-column kind. A column is binary iff its observed value set is a
/// subset of {0, 1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Continuous,
    Binary,
}

/// A feature matrix with named columns, optional binary labels, and
/// per-column metadata. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabularDataset {
    columns: Vec<String>,
    kinds: Vec<ColumnKind>,
    rows: Vec<Vec<f64>>,
    labels: Option<Vec<f64>>,
}

impl TabularDataset {
    /// Builds a dataset from rows, inferring column kinds. Labels, when
    /// present, must be in {0, 1} and match the row count.
    pub fn new(
        columns: Vec<String>,
        rows: Vec<Vec<f64>>,
        labels: Option<Vec<f64>>,
    ) -> Result<Self, DatasetError> {
        let m = columns.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(DatasetError::Parse {
                    row: i + 1,
                    column: String::new(),
                    message: format!("expected {m} values, found {}", row.len()),
                });
            }
        }
        if let Some(labels) = &labels {
            if labels.len() != rows.len() {
                return Err(DatasetError::SchemaMismatch(format!(
                    "{} labels for {} rows",
                    labels.len(),
                    rows.len()
                )));
            }
            for (i, &y) in labels.iter().enumerate() {
                if y != 0.0 && y != 1.0 {
                    return Err(DatasetError::InvalidLabel {
                        row: i + 1,
                        value: y,
                    });
                }
            }
        }
        let kinds = infer_kinds(&rows, m);
        Ok(Self {
            columns,
            kinds,
            rows,
            labels,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn kinds(&self) -> &[ColumnKind] {
        &self.kinds
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn labels(&self) -> Option<&[f64]> {
        self.labels.as_deref()
    }

    pub fn is_labeled(&self) -> bool {
        self.labels.is_some()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Values of one column across all rows.
    pub fn column_values(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    /// A new dataset containing the given rows (by index), in the given
    /// order. Labels follow along when present.
    pub fn subset(&self, indices: &[usize]) -> TabularDataset {
        TabularDataset {
            columns: self.columns.clone(),
            kinds: self.kinds.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: self
                .labels
                .as_ref()
                .map(|l| indices.iter().map(|&i| l[i]).collect()),
        }
    }

    /// Count of cells exactly equal to `sentinel` per column. Sentinel codes
    /// (e.g. -8 for "no record") pass through ingestion verbatim; this is the
    /// reporting hook for their prevalence.
    pub fn sentinel_prevalence(&self, sentinel: f64) -> Vec<usize> {
        let mut counts = vec![0usize; self.n_features()];
        for row in &self.rows {
            for (j, &v) in row.iter().enumerate() {
                if v == sentinel {
                    counts[j] += 1;
                }
            }
        }
        counts
    }
}

fn infer_kinds(rows: &[Vec<f64>], m: usize) -> Vec<ColumnKind> {
    (0..m)
        .map(|j| {
            if rows.iter().all(|r| r[j] == 0.0 || r[j] == 1.0) {
                ColumnKind::Binary
            } else {
                ColumnKind::Continuous
            }
        })
        .collect()
}

/// Loads a dataset from a CSV file: UTF-8, comma-separated, mandatory header
/// row, '.' decimal separator, no quoting of numeric fields. When
/// `label_column` is given, that column is split off as the labels.
pub fn load_csv(path: &Path, label_column: Option<&str>) -> Result<TabularDataset, DatasetError> {
    let text = std::fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_csv(&text, label_column)
}

/// CSV parsing split out from I/O so in-memory round-trips are testable.
pub fn parse_csv(text: &str, label_column: Option<&str>) -> Result<TabularDataset, DatasetError> {
    let mut lines = text.lines().map(|l| l.trim_end_matches('\r'));
    let header = lines
        .next()
        .filter(|l| !l.is_empty())
        .ok_or_else(|| DatasetError::Parse {
            row: 0,
            column: String::new(),
            message: "missing header row".into(),
        })?;
    let all_columns: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    let label_idx = match label_column {
        Some(name) => Some(
            all_columns
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| DatasetError::MissingColumn(name.to_string()))?,
        ),
        None => None,
    };

    let mut rows = Vec::new();
    let mut labels = label_idx.map(|_| Vec::new());
    for (line_no, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != all_columns.len() {
            return Err(DatasetError::Parse {
                row: line_no + 1,
                column: String::new(),
                message: format!(
                    "expected {} cells, found {}",
                    all_columns.len(),
                    cells.len()
                ),
            });
        }
        let mut row = Vec::with_capacity(all_columns.len() - label_idx.map_or(0, |_| 1));
        for (j, cell) in cells.iter().enumerate() {
            let value: f64 = cell.trim().parse().map_err(|_| DatasetError::Parse {
                row: line_no + 1,
                column: all_columns[j].clone(),
                message: format!("cell \"{}\" is not a number", cell.trim()),
            })?;
            if Some(j) == label_idx {
                if value != 0.0 && value != 1.0 {
                    return Err(DatasetError::InvalidLabel {
                        row: line_no + 1,
                        value,
                    });
                }
                labels.as_mut().unwrap().push(value);
            } else {
                row.push(value);
            }
        }
        rows.push(row);
    }

    let columns: Vec<String> = all_columns
        .iter()
        .enumerate()
        .filter(|(j, _)| Some(*j) != label_idx)
        .map(|(_, c)| c.clone())
        .collect();
    TabularDataset::new(columns, rows, labels)
}

/// Serializes a dataset back to the CSV format accepted by [`load_csv`].
/// Floats print in shortest round-trip form, so load → write → load is exact.
pub fn to_csv(data: &TabularDataset, label_column: Option<&str>) -> String {
    let mut out = String::new();
    let mut header: Vec<&str> = data.columns.iter().map(|s| s.as_str()).collect();
    if let Some(name) = label_column {
        header.push(name);
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for (i, row) in data.rows.iter().enumerate() {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            let _ = write!(out, "{v}");
            first = false;
        }
        if label_column.is_some() {
            let y = data.labels.as_ref().map_or(0.0, |l| l[i]);
            let _ = write!(out, ",{y}");
        }
        out.push('\n');
    }
    out
}

/// Writes a dataset to disk in the [`load_csv`] format.
pub fn save_csv(
    data: &TabularDataset,
    path: &Path,
    label_column: Option<&str>,
) -> Result<(), DatasetError> {
    std::fs::write(path, to_csv(data, label_column)).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn load_infers_binary_columns() {
        let data = parse_csv("a,b\n0,1\n1,0\n1,1\n", None).unwrap();
        assert_eq!(data.n_features(), 2);
        assert_eq!(data.n_rows(), 3);
        assert_eq!(data.kinds(), &[ColumnKind::Binary, ColumnKind::Binary]);
        assert_eq!(data.rows()[0], vec![0.0, 1.0]);
    }

    #[test]
    fn load_splits_label_column() {
        let data = parse_csv("a,b\n0,1\n1,0\n1,1\n", Some("b")).unwrap();
        assert_eq!(data.n_features(), 1);
        assert_eq!(data.columns(), &["a".to_string()]);
        assert_eq!(data.labels().unwrap(), &[1.0, 0.0, 1.0]);
    }

    #[test]
    fn parse_error_names_row_and_column() {
        let err = parse_csv("a,b\n0,1\nabc,0\n", None).unwrap_err();
        match err {
            DatasetError::Parse { row, column, .. } => {
                assert_eq!(row, 2);
                assert_eq!(column, "a");
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn missing_label_column_is_reported() {
        let err = parse_csv("a,b\n0,1\n", Some("c")).unwrap_err();
        assert!(matches!(err, DatasetError::MissingColumn(c) if c == "c"));
    }

    #[test]
    fn row_length_mismatch_is_reported() {
        let err = parse_csv("a,b\n0,1,2\n", None).unwrap_err();
        assert!(matches!(err, DatasetError::Parse { row: 1, .. }));
    }

    #[test]
    fn labels_outside_zero_one_rejected() {
        let err = parse_csv("a,y\n0,2\n", Some("y")).unwrap_err();
        assert!(matches!(err, DatasetError::InvalidLabel { row: 1, value } if value == 2.0));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let text = "x,y,label\n0.1,-8,1\n1e-12,3.5,0\n0.30000000000000004,2,1\n";
        let data = parse_csv(text, Some("label")).unwrap();
        let written = to_csv(&data, Some("label"));
        let reloaded = parse_csv(&written, Some("label")).unwrap();
        assert_eq!(data, reloaded);
    }

    #[test]
    fn sentinel_prevalence_counts_exact_matches() {
        let data = parse_csv("a,b\n-8,1\n-8,-8\n0,2\n", None).unwrap();
        assert_eq!(data.sentinel_prevalence(-8.0), vec![2, 1]);
    }

    #[test]
    fn subset_preserves_labels_and_order() {
        let data = parse_csv("a,y\n1,0\n2,1\n3,0\n4,1\n", Some("y")).unwrap();
        let sub = data.subset(&[3, 1]);
        assert_eq!(sub.rows(), &[vec![4.0], vec![2.0]]);
        assert_eq!(sub.labels().unwrap(), &[1.0, 1.0]);
    }
}
