//! Labeled numeric datasets and CSV ingestion.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A labeled dataset: an n x d feature matrix plus per-row class indices.
#[derive(Debug, Clone)]
pub struct Dataset {
    name: String,
    feature_names: Vec<String>,
    features: DMatrix<f64>,
    labels: Vec<usize>,
    classes: Vec<String>,
}

impl Dataset {
    pub fn new(
        name: String,
        feature_names: Vec<String>,
        features: DMatrix<f64>,
        labels: Vec<usize>,
        classes: Vec<String>,
    ) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: features.nrows(),
                got: labels.len(),
            });
        }
        if feature_names.len() != features.ncols() {
            return Err(Error::DimensionMismatch {
                expected: features.ncols(),
                got: feature_names.len(),
            });
        }
        if classes.len() < 2 {
            return Err(Error::DataFormat {
                path: name,
                message: format!("need at least 2 classes, found {}", classes.len()),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= classes.len()) {
            return Err(Error::DataFormat {
                path: name,
                message: format!("label index {bad} out of range"),
            });
        }
        Ok(Self {
            name,
            feature_names,
            features,
            labels,
            classes,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Class names, sorted; label indices refer to this list.
    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn n(&self) -> usize {
        self.features.nrows()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn class_count(&self, class: usize) -> usize {
        self.labels.iter().filter(|&&l| l == class).count()
    }

    /// Row indices belonging to a class, ascending.
    pub fn class_indices(&self, class: usize) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.labels[i] == class).collect()
    }

    /// Extracts the given rows as a new matrix.
    pub fn rows(&self, indices: &[usize]) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(indices.len(), d, |i, j| self.features[(indices[i], j)])
    }
}

/// Reads a dataset from an RFC-4180 CSV file with a header row.
///
/// `label_column` names the class column; `drop_columns` are removed before
/// parsing (mirroring protocols that exclude linearly dependent variables).
/// Any missing or non-numeric feature cell fails with its row and column.
pub fn ingest_csv(path: &Path, label_column: &str, drop_columns: &[String]) -> Result<Dataset> {
    let display = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::DataFormat {
            path: display.clone(),
            message: e.to_string(),
        })?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::DataFormat {
            path: display.clone(),
            message: e.to_string(),
        })?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();

    for i in 0..headers.len() {
        for j in (i + 1)..headers.len() {
            if headers[i] == headers[j] {
                return Err(Error::DataFormat {
                    path: display,
                    message: format!("duplicated header name '{}'", headers[i]),
                });
            }
        }
    }
    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| Error::Config(format!("label column '{label_column}' not found")))?;
    for dropped in drop_columns {
        if !headers.iter().any(|h| h == dropped) {
            return Err(Error::Config(format!(
                "drop column '{dropped}' not found in header"
            )));
        }
    }
    let feature_cols: Vec<usize> = (0..headers.len())
        .filter(|&i| i != label_idx && !drop_columns.contains(&headers[i]))
        .collect();
    if feature_cols.is_empty() {
        return Err(Error::DataFormat {
            path: display,
            message: "no feature columns left after dropping".into(),
        });
    }

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut raw_labels: Vec<String> = Vec::new();
    for (row_number, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::DataFormat {
            path: display.clone(),
            message: format!("row {}: {e}", row_number + 1),
        })?;
        let mut row = Vec::with_capacity(feature_cols.len());
        for &col in &feature_cols {
            let cell = record.get(col).unwrap_or("").trim();
            if cell.is_empty() {
                return Err(Error::DataFormat {
                    path: display,
                    message: format!(
                        "missing value at row {}, column '{}'",
                        row_number + 1,
                        headers[col]
                    ),
                });
            }
            let value: f64 = cell.parse().map_err(|_| Error::DataFormat {
                path: display.clone(),
                message: format!(
                    "non-numeric value '{cell}' at row {}, column '{}'",
                    row_number + 1,
                    headers[col]
                ),
            })?;
            if !value.is_finite() {
                return Err(Error::DataFormat {
                    path: display,
                    message: format!(
                        "non-finite value at row {}, column '{}'",
                        row_number + 1,
                        headers[col]
                    ),
                });
            }
            row.push(value);
        }
        let label = record.get(label_idx).unwrap_or("").trim();
        if label.is_empty() {
            return Err(Error::DataFormat {
                path: display,
                message: format!(
                    "missing label at row {}, column '{}'",
                    row_number + 1,
                    headers[label_idx]
                ),
            });
        }
        raw_labels.push(label.to_string());
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::DataFormat {
            path: display,
            message: "no data rows".into(),
        });
    }

    let mut class_set: BTreeMap<String, usize> = BTreeMap::new();
    for l in &raw_labels {
        let next = class_set.len();
        class_set.entry(l.clone()).or_insert(next);
    }
    // Re-index classes in sorted order for determinism.
    let classes: Vec<String> = class_set.keys().cloned().collect();
    let index_of: BTreeMap<&String, usize> = classes
        .iter()
        .enumerate()
        .map(|(i, c)| (c, i))
        .collect();
    let labels: Vec<usize> = raw_labels.iter().map(|l| index_of[l]).collect();

    let d = feature_cols.len();
    let features = DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]);
    let feature_names = feature_cols
        .iter()
        .map(|&c| headers[c].clone())
        .collect();
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| display.clone());
    Dataset::new(name, feature_names, features, labels, classes)
}
