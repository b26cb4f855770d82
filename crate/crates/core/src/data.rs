//! Points, labels and the shared example store.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DataError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite value at coordinate {index}")]
    NonFinite { index: usize },
    #[error("vector must not be empty")]
    Empty,
    #[error("class {class} out of range for {classes} classes")]
    ClassOutOfRange { class: usize, classes: usize },
}

fn validated(values: Vec<f64>) -> Result<Vec<f64>, DataError> {
    if values.is_empty() {
        return Err(DataError::Empty);
    }
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(DataError::NonFinite { index });
    }
    Ok(values)
}

/// A location in the feature space. Coordinates are always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Position {
    coords: Vec<f64>,
}

impl Position {
    pub fn new(coords: Vec<f64>) -> Result<Self, DataError> {
        Ok(Self { coords: validated(coords)? })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

/// A real-valued label: a class-indicator vector for classification, the
/// target vector for regression, or a copy of the position for retrieval.
/// Entries are always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelVector {
    values: Vec<f64>,
}

impl LabelVector {
    pub fn new(values: Vec<f64>) -> Result<Self, DataError> {
        Ok(Self { values: validated(values)? })
    }

    /// One-hot vector with a 1.0 in position `class`.
    pub fn indicator(class: usize, classes: usize) -> Result<Self, DataError> {
        if classes == 0 {
            return Err(DataError::Empty);
        }
        if class >= classes {
            return Err(DataError::ClassOutOfRange { class, classes });
        }
        let mut values = vec![0.0; classes];
        values[class] = 1.0;
        Ok(Self { values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Index of the largest entry; ties resolve to the lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate().skip(1) {
            if *v > self.values[best] {
                best = i;
            }
        }
        best
    }
}

/// One training example: where it sits and what it carries.
#[derive(Debug, Clone, PartialEq)]
pub struct DataPoint {
    pub position: Position,
    pub label: LabelVector,
}

/// Stable handle into an [`ExampleStore`]. Ids are dense and assigned in
/// append order, starting at 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExampleId(pub u32);

impl ExampleId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for ExampleId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Append-only store of examples shared by every tree in a forest. The first
/// append fixes the position and label dimensions; later appends must match.
#[derive(Debug, Clone, Default)]
pub struct ExampleStore {
    points: Vec<DataPoint>,
}

impl ExampleStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn append(&mut self, point: DataPoint) -> Result<ExampleId, DataError> {
        if let Some(first) = self.points.first() {
            if point.position.dim() != first.position.dim() {
                return Err(DataError::DimensionMismatch {
                    expected: first.position.dim(),
                    got: point.position.dim(),
                });
            }
            if point.label.dim() != first.label.dim() {
                return Err(DataError::DimensionMismatch {
                    expected: first.label.dim(),
                    got: point.label.dim(),
                });
            }
        }
        let id = ExampleId(self.points.len() as u32);
        self.points.push(point);
        Ok(id)
    }

    pub fn get(&self, id: ExampleId) -> &DataPoint {
        &self.points[id.index()]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Feature dimension, once at least one example is stored.
    pub fn position_dim(&self) -> Option<usize> {
        self.points.first().map(|p| p.position.dim())
    }

    pub fn label_dim(&self) -> Option<usize> {
        self.points.first().map(|p| p.label.dim())
    }

    pub fn iter(&self) -> impl Iterator<Item = (ExampleId, &DataPoint)> {
        self.points.iter().enumerate().map(|(i, p)| (ExampleId(i as u32), p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(xy: &[f64], class: usize) -> DataPoint {
        DataPoint {
            position: Position::new(xy.to_vec()).unwrap(),
            label: LabelVector::indicator(class, 3).unwrap(),
        }
    }

    #[test]
    fn append_assigns_dense_ids_in_order() {
        let mut store = ExampleStore::new();
        let a = store.append(point(&[0.0, 1.0], 0)).unwrap();
        let b = store.append(point(&[2.0, 3.0], 1)).unwrap();
        assert_eq!(a, ExampleId(0));
        assert_eq!(b, ExampleId(1));
        assert_eq!(store.len(), 2);
        assert_eq!(store.get(a).position.coords(), &[0.0, 1.0]);
        assert_eq!(store.get(b).label.argmax(), 1);
    }

    #[test]
    fn append_rejects_schema_mismatch() {
        let mut store = ExampleStore::new();
        store.append(point(&[0.0, 1.0], 0)).unwrap();
        let narrow = DataPoint {
            position: Position::new(vec![1.0]).unwrap(),
            label: LabelVector::indicator(0, 3).unwrap(),
        };
        assert_eq!(
            store.append(narrow),
            Err(DataError::DimensionMismatch { expected: 2, got: 1 })
        );
        let wide_label = DataPoint {
            position: Position::new(vec![1.0, 2.0]).unwrap(),
            label: LabelVector::indicator(0, 5).unwrap(),
        };
        assert_eq!(
            store.append(wide_label),
            Err(DataError::DimensionMismatch { expected: 3, got: 5 })
        );
    }

    #[test]
    fn position_rejects_non_finite_and_empty() {
        assert_eq!(Position::new(vec![]), Err(DataError::Empty));
        assert_eq!(
            Position::new(vec![0.0, f64::NAN]),
            Err(DataError::NonFinite { index: 1 })
        );
        assert_eq!(
            Position::new(vec![f64::INFINITY]),
            Err(DataError::NonFinite { index: 0 })
        );
    }

    #[test]
    fn indicator_is_one_hot() {
        let label = LabelVector::indicator(2, 4).unwrap();
        assert_eq!(label.values(), &[0.0, 0.0, 1.0, 0.0]);
        assert_eq!(label.argmax(), 2);
        assert!(LabelVector::indicator(4, 4).is_err());
    }

    #[test]
    fn argmax_ties_resolve_to_lowest_index() {
        let label = LabelVector::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(label.argmax(), 0);
        let label = LabelVector::new(vec![0.1, 0.7, 0.7]).unwrap();
        assert_eq!(label.argmax(), 1);
    }
}
