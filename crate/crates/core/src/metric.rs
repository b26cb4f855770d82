//! Distances between positions and between labels.
//!
//! The position metric compares locations in feature space; the label metric
//! decides whether a prediction was "close enough" for training to skip an
//! example. Keeping the two independent is what lets one learner cover
//! classification (discrete label distance), regression (numeric tolerance)
//! and retrieval (labels always count as far, so every example is stored).

use crate::data::{DataError, LabelVector, Position};

/// Distance between positions. Euclidean is the only built-in; the
/// signature admits any real-valued function of two positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PositionMetric {
    Euclidean,
}

impl PositionMetric {
    /// Distance between two positions of equal dimension.
    pub fn distance(self, a: &Position, b: &Position) -> Result<f64, DataError> {
        if a.dim() != b.dim() {
            return Err(DataError::DimensionMismatch { expected: a.dim(), got: b.dim() });
        }
        Ok(self.raw(a.coords(), b.coords()))
    }

    /// Distance between coordinate slices whose lengths are already known to
    /// match. This is the hot path; callers check dimensions once per query.
    #[inline]
    pub(crate) fn raw(self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        match self {
            PositionMetric::Euclidean => {
                let mut acc = 0.0;
                for (x, y) in a.iter().zip(b) {
                    let d = x - y;
                    acc += d * d;
                }
                acc.sqrt()
            }
        }
    }
}

/// Distance between labels, used only for the add/skip decision in training.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelMetric {
    /// 0 when the argmax classes agree, 1 otherwise.
    Discrete,
    /// Largest absolute per-coordinate difference.
    AbsoluteDifference,
    /// Every pair of labels counts as far; training always stores.
    AlwaysFar,
}

/// Result of a label comparison. `Far` exceeds every finite threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LabelDistance {
    Finite(f64),
    Far,
}

impl LabelDistance {
    /// Whether this distance exceeds the training threshold.
    pub fn exceeds(self, epsilon: f64) -> bool {
        match self {
            LabelDistance::Finite(d) => d > epsilon,
            LabelDistance::Far => true,
        }
    }
}

impl LabelMetric {
    pub fn distance(self, a: &LabelVector, b: &LabelVector) -> Result<LabelDistance, DataError> {
        if a.dim() != b.dim() {
            return Err(DataError::DimensionMismatch { expected: a.dim(), got: b.dim() });
        }
        Ok(match self {
            LabelMetric::Discrete => {
                LabelDistance::Finite(if a.argmax() == b.argmax() { 0.0 } else { 1.0 })
            }
            LabelMetric::AbsoluteDifference => {
                let max = a
                    .values()
                    .iter()
                    .zip(b.values())
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max);
                LabelDistance::Finite(max)
            }
            LabelMetric::AlwaysFar => LabelDistance::Far,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pos(coords: &[f64]) -> Position {
        Position::new(coords.to_vec()).unwrap()
    }

    fn label(values: &[f64]) -> LabelVector {
        LabelVector::new(values.to_vec()).unwrap()
    }

    #[test]
    fn euclidean_three_four_five() {
        let d = PositionMetric::Euclidean.distance(&pos(&[0.0, 0.0]), &pos(&[3.0, 4.0])).unwrap();
        assert_eq!(d, 5.0);
    }

    #[test]
    fn euclidean_matches_direct_formula() {
        let a = [0.2, 0.9, 0.4];
        let b = [0.7, 0.1, 0.0];
        // Expected value computed term by term, independent of the kernel.
        let mut sum = 0.0f64;
        for i in 0..3 {
            sum += (a[i] - b[i]) * (a[i] - b[i]);
        }
        let expected = sum.sqrt();
        assert_relative_eq!(expected, 1.024_695_076_595_959_8, max_relative = 1e-15);
        let d = PositionMetric::Euclidean.distance(&pos(&a), &pos(&b)).unwrap();
        assert_eq!(d, expected);
    }

    #[test]
    fn distance_to_self_is_zero() {
        let p = pos(&[1.5, -2.0, 7.25]);
        assert_eq!(PositionMetric::Euclidean.distance(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn distance_rejects_dimension_mismatch() {
        let err = PositionMetric::Euclidean.distance(&pos(&[1.0]), &pos(&[1.0, 2.0]));
        assert_eq!(err, Err(DataError::DimensionMismatch { expected: 1, got: 2 }));
    }

    #[test]
    fn discrete_label_distance() {
        let a = label(&[0.0, 1.0, 0.0]);
        let b = label(&[0.1, 0.8, 0.1]);
        let c = label(&[0.9, 0.05, 0.05]);
        assert_eq!(LabelMetric::Discrete.distance(&a, &b).unwrap(), LabelDistance::Finite(0.0));
        assert_eq!(LabelMetric::Discrete.distance(&a, &c).unwrap(), LabelDistance::Finite(1.0));
    }

    #[test]
    fn absolute_difference_takes_the_largest_gap() {
        let a = label(&[1.0, 5.0]);
        let b = label(&[1.2, 4.0]);
        assert_eq!(
            LabelMetric::AbsoluteDifference.distance(&a, &b).unwrap(),
            LabelDistance::Finite(1.0)
        );
    }

    #[test]
    fn always_far_exceeds_any_threshold() {
        let a = label(&[1.0]);
        let d = LabelMetric::AlwaysFar.distance(&a, &a).unwrap();
        assert_eq!(d, LabelDistance::Far);
        assert!(d.exceeds(f64::MAX));
    }

    #[test]
    fn exceeds_is_strict() {
        assert!(!LabelDistance::Finite(0.5).exceeds(0.5));
        assert!(LabelDistance::Finite(0.5 + 1e-12).exceeds(0.5));
        assert!(!LabelDistance::Finite(0.0).exceeds(0.0));
    }
}
