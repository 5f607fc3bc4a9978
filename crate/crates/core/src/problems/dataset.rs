//! CSV dataset ingestion for the classifier benchmark.

use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;

/// A classification dataset with standardized features.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub features: DenseMatrix,
    pub labels: Vec<usize>,
    pub class_count: usize,
    pub class_names: Vec<String>,
}

impl Dataset {
    pub fn samples(&self) -> usize {
        self.features.rows()
    }

    pub fn feature_count(&self) -> usize {
        self.features.cols()
    }
}

/// Selects the label column by position or header name.
#[derive(Debug, Clone)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
}

/// Loads a comma-separated dataset. A non-numeric first row is treated as a
/// header. Features are standardized per column (zero mean, unit variance;
/// zero-variance columns are left at zero), and class labels are mapped to
/// `0..C` in first-appearance order.
pub fn load_csv_dataset(path: &Path, label: &LabelColumn) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_csv_dataset(&text, label)
}

/// Same as [`load_csv_dataset`] but over in-memory text (used for the
/// embedded iris copy and in tests).
pub fn parse_csv_dataset(text: &str, label: &LabelColumn) -> Result<Dataset> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .peekable();

    let (_, first) = *lines.peek().ok_or_else(|| Error::Dataset("empty file".into()))?;
    let first_fields: Vec<&str> = first.split(',').map(str::trim).collect();
    let has_header = first_fields.iter().all(|f| f.parse::<f64>().is_err());
    let header: Option<Vec<String>> = if has_header {
        lines.next();
        Some(first_fields.iter().map(|s| s.to_string()).collect())
    } else {
        None
    };

    let width = first_fields.len();
    if width < 2 {
        return Err(Error::Dataset("need at least one feature and one label column".into()));
    }
    let label_idx = match label {
        LabelColumn::Index(i) => {
            if *i >= width {
                return Err(Error::Dataset(format!(
                    "label column {i} out of range (row width {width})"
                )));
            }
            *i
        }
        LabelColumn::Name(name) => match &header {
            Some(h) => h.iter().position(|c| c == name).ok_or_else(|| {
                Error::Dataset(format!("label column '{name}' not found in header"))
            })?,
            None => {
                return Err(Error::Dataset(
                    "label column selected by name but the file has no header".into(),
                ))
            }
        },
    };

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut raw_labels: Vec<String> = Vec::new();
    for (line_no, line) in lines {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != width {
            return Err(Error::MalformedRow {
                row: line_no,
                message: format!("expected {width} fields, found {}", fields.len()),
            });
        }
        let mut feats = Vec::with_capacity(width - 1);
        for (j, field) in fields.iter().enumerate() {
            if j == label_idx {
                raw_labels.push(field.to_string());
            } else {
                let v: f64 = field.parse().map_err(|_| Error::MalformedRow {
                    row: line_no,
                    message: format!("field {j} ('{field}') is not numeric"),
                })?;
                if !v.is_finite() {
                    return Err(Error::MalformedRow {
                        row: line_no,
                        message: format!("field {j} is not finite"),
                    });
                }
                feats.push(v);
            }
        }
        rows.push(feats);
    }
    if rows.is_empty() {
        return Err(Error::Dataset("no data rows".into()));
    }

    // Map labels to 0..C in first-appearance order.
    let mut class_names: Vec<String> = Vec::new();
    let labels: Vec<usize> = raw_labels
        .into_iter()
        .map(|raw| match class_names.iter().position(|c| *c == raw) {
            Some(i) => i,
            None => {
                class_names.push(raw);
                class_names.len() - 1
            }
        })
        .collect();

    // Standardize each feature column; guard zero variance.
    let n = rows.len();
    let d = width - 1;
    let mut features = DenseMatrix::from_fn(n, d, |i, j| rows[i][j]);
    for j in 0..d {
        let mean: f64 = (0..n).map(|i| features.get(i, j)).sum::<f64>() / n as f64;
        let var: f64 = (0..n).map(|i| (features.get(i, j) - mean).powi(2)).sum::<f64>() / n as f64;
        let std = var.sqrt();
        for i in 0..n {
            let v = if std > 0.0 { (features.get(i, j) - mean) / std } else { 0.0 };
            features.set(i, j, v);
        }
    }

    Ok(Dataset {
        features,
        labels,
        class_count: class_names.len(),
        class_names,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_small_handwritten_csv() {
        let text = "1.0,2.0,a\n2.0,4.0,b\n3.0,6.0,a\n";
        let d = parse_csv_dataset(text, &LabelColumn::Index(2)).unwrap();
        assert_eq!(d.samples(), 3);
        assert_eq!(d.feature_count(), 2);
        assert_eq!(d.class_count, 2);
        assert_eq!(d.labels, vec![0, 1, 0]);
        // Standardized columns have zero mean.
        for j in 0..2 {
            let mean: f64 = (0..3).map(|i| d.features.get(i, j)).sum::<f64>() / 3.0;
            assert!(mean.abs() < 1e-12);
        }
    }

    #[test]
    fn zero_variance_column_left_at_zero() {
        let text = "5.0,1.0,x\n5.0,2.0,y\n5.0,3.0,x\n";
        let d = parse_csv_dataset(text, &LabelColumn::Index(2)).unwrap();
        for i in 0..3 {
            assert_eq!(d.features.get(i, 0), 0.0);
        }
    }

    #[test]
    fn header_detected_and_label_by_name() {
        let text = "f1,f2,species\n1.0,2.0,a\n2.0,1.0,b\n";
        let d = parse_csv_dataset(text, &LabelColumn::Name("species".into())).unwrap();
        assert_eq!(d.samples(), 2);
        assert_eq!(d.class_names, vec!["a", "b"]);
    }

    #[test]
    fn malformed_row_reports_line_number() {
        let text = "1.0,2.0,a\n1.0,oops,b\n";
        match parse_csv_dataset(text, &LabelColumn::Index(2)) {
            Err(Error::MalformedRow { row, .. }) => assert_eq!(row, 2),
            other => panic!("expected malformed-row error, got {other:?}"),
        }
    }

    #[test]
    fn empty_file_is_an_error() {
        assert!(parse_csv_dataset("", &LabelColumn::Index(0)).is_err());
    }
}
