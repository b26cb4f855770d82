//! LIBSVM sparse text format: `label idx:val idx:val ...` per line, feature
//! indices 1-based and strictly increasing. Positions densify to the maximum
//! feature index seen, with absent coordinates at zero.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};

/// One parsed line: the raw label token and the sparse features.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRow {
    pub label: String,
    /// `(index, value)` with 1-based, strictly increasing indices.
    pub features: Vec<(u32, f64)>,
}

/// A whole LIBSVM file; rows keep file order.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub rows: Vec<SparseRow>,
    /// Largest feature index in the file (0 when every row is empty).
    pub max_index: u32,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Dense coordinates for one row, padded with zeros to `dim`.
    pub fn to_dense(&self, row: usize, dim: usize) -> Vec<f64> {
        let mut coords = vec![0.0; dim];
        for &(index, value) in &self.rows[row].features {
            coords[index as usize - 1] = value;
        }
        coords
    }
}

/// Parse a LIBSVM file. Blank lines are skipped; any malformed line fails
/// with its line number.
pub fn load_libsvm(path: &Path) -> Result<Dataset> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut rows = Vec::new();
    let mut max_index = 0u32;
    for (number, line) in text.lines().enumerate() {
        let number = number + 1;
        let mut tokens = line.split_whitespace();
        let Some(label) = tokens.next() else {
            continue;
        };
        if label.contains(':') {
            bail!("{}:{}: line has no label", path.display(), number);
        }
        let mut features = Vec::new();
        let mut previous = 0u32;
        for token in tokens {
            let Some((index, value)) = token.split_once(':') else {
                bail!("{}:{}: expected idx:val, got {token:?}", path.display(), number);
            };
            let index: u32 = index.parse().with_context(|| {
                format!("{}:{}: bad feature index {index:?}", path.display(), number)
            })?;
            let value: f64 = value.parse().with_context(|| {
                format!("{}:{}: bad feature value {value:?}", path.display(), number)
            })?;
            if index == 0 {
                bail!("{}:{}: feature indices are 1-based", path.display(), number);
            }
            if index <= previous {
                bail!(
                    "{}:{}: feature index {index} is not strictly increasing",
                    path.display(),
                    number
                );
            }
            if !value.is_finite() {
                bail!("{}:{}: non-finite feature value", path.display(), number);
            }
            previous = index;
            features.push((index, value));
        }
        max_index = max_index.max(previous);
        rows.push(SparseRow { label: label.to_string(), features });
    }
    Ok(Dataset { rows, max_index })
}

/// Write rows back out in the same format (used for round-trip checks).
pub fn write_libsvm(path: &Path, dataset: &Dataset) -> Result<()> {
    let mut out = String::new();
    for row in &dataset.rows {
        out.push_str(&row.label);
        for &(index, value) in &row.features {
            let _ = write!(out, " {index}:{value}");
        }
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

/// Distinct numeric labels across the given datasets, sorted ascending.
/// A row's class is its label's position in this list.
pub fn class_values(datasets: &[&Dataset]) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    for dataset in datasets {
        for row in &dataset.rows {
            let value: f64 = row
                .label
                .parse()
                .with_context(|| format!("non-numeric class label {:?}", row.label))?;
            if !value.is_finite() {
                bail!("non-finite class label {:?}", row.label);
            }
            values.push(value);
        }
    }
    values.sort_unstable_by(f64::total_cmp);
    values.dedup();
    Ok(values)
}

/// The 0-based class for a label under `class_values`' mapping.
pub fn class_of(values: &[f64], label: f64) -> usize {
    values.partition_point(|&v| v < label)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
        let path = dir.join(name);
        fs::write(&path, text).unwrap();
        path
    }

    #[test]
    fn parses_sparse_lines_densely() {
        let dir = tempdir().unwrap();
        let path = write(dir.path(), "toy.svm", "3 1:0.5 4:2.0\n1 2:-1\n");
        let data = load_libsvm(&path).unwrap();
        assert_eq!(data.len(), 2);
        assert_eq!(data.max_index, 4);
        assert_eq!(data.to_dense(0, 4), vec![0.5, 0.0, 0.0, 2.0]);
        assert_eq!(data.to_dense(1, 4), vec![0.0, -1.0, 0.0, 0.0]);
        assert_eq!(data.rows[0].label, "3");
    }

    #[test]
    fn label_only_rows_and_blank_lines_are_fine() {
        let dir = tempdir().unwrap();
        let path = write(dir.path(), "toy.svm", "2\n\n1 1:7\n");
        let data = load_libsvm(&path).unwrap();
        assert_eq!(data.len(), 2);
        assert_eq!(data.rows[0].features, vec![]);
    }

    #[test]
    fn malformed_lines_report_their_number() {
        let dir = tempdir().unwrap();
        for (text, needle) in [
            ("1 3:1 2:5\n", "not strictly increasing"),
            ("1 0:1\n", "1-based"),
            ("1 a:1\n", "bad feature index"),
            ("1 1:x\n", "bad feature value"),
            ("1:5 2:1\n", "no label"),
            ("1 1\n", "expected idx:val"),
        ] {
            let path = write(dir.path(), "bad.svm", text);
            let err = format!("{:#}", load_libsvm(&path).unwrap_err());
            assert!(err.contains(needle), "{err}");
            assert!(err.contains(":1:"), "{err}");
        }
    }

    #[test]
    fn round_trip_preserves_dense_vectors() {
        let dir = tempdir().unwrap();
        let path = write(
            dir.path(),
            "orig.svm",
            "5 1:0.1 3:7e-3 9:123.456\n-1 2:0.30000000000000004\n",
        );
        let original = load_libsvm(&path).unwrap();
        let copy_path = dir.path().join("copy.svm");
        write_libsvm(&copy_path, &original).unwrap();
        let copy = load_libsvm(&copy_path).unwrap();
        assert_eq!(original.max_index, copy.max_index);
        for row in 0..original.len() {
            assert_eq!(
                original.to_dense(row, original.max_index as usize),
                copy.to_dense(row, copy.max_index as usize)
            );
        }
    }

    #[test]
    fn classes_map_sorted_and_dense() {
        let dir = tempdir().unwrap();
        let train = load_libsvm(&write(dir.path(), "a.svm", "3 1:1\n-1 1:2\n")).unwrap();
        let test = load_libsvm(&write(dir.path(), "b.svm", "7 1:3\n3 1:4\n")).unwrap();
        let values = class_values(&[&train, &test]).unwrap();
        assert_eq!(values, vec![-1.0, 3.0, 7.0]);
        assert_eq!(class_of(&values, -1.0), 0);
        assert_eq!(class_of(&values, 3.0), 1);
        assert_eq!(class_of(&values, 7.0), 2);

        let bad = load_libsvm(&write(dir.path(), "c.svm", "spam 1:1\n")).unwrap();
        assert!(class_values(&[&bad]).is_err());
    }
}
