//! Shared helpers for the criterion benchmarks.
//!
//! The package exists for its `benches/` targets; this library only hosts
//! the data-generation code they have in common.

use boundary_forest::{
    BoundaryForest, DataPoint, ForestConfig, LabelVector, PositionMetric, SyntheticSource,
    TaskMode,
};

/// Labeled points from the unit-hypercube source: two classes split by the
/// first coordinate. Cheap to generate, non-trivial to classify.
pub fn hypercube_points(dim: usize, n: usize, seed: u64) -> Vec<DataPoint> {
    SyntheticSource::Hypercube { dim, seed }
        .sampler()
        .expect("valid source")
        .take(n)
        .map(|position| {
            let class = usize::from(position.coords()[0] >= 0.5);
            let label = LabelVector::indicator(class, 2).expect("valid label");
            DataPoint { position, label }
        })
        .collect()
}

/// A forest trained on `train`, ready to be queried.
pub fn trained_forest(train: &[DataPoint], trees: usize, cap: &str, seed: u64) -> BoundaryForest {
    let config = ForestConfig {
        mode: TaskMode::Classification,
        trees,
        cap: cap.parse().expect("valid cap"),
        metric: PositionMetric::Euclidean,
        seed,
    };
    let mut forest = BoundaryForest::new(config).expect("valid config");
    for point in train {
        forest.train(point.clone()).expect("training succeeds");
    }
    forest
}
