//! Online instance-based learning with forests of shallow metric search trees.
//!
//! A boundary forest keeps a small set of search trees over one shared store of
//! training examples. A query descends each tree greedily toward a locally
//! closest stored example; training inserts an example into a tree only when
//! that tree's answer for it is wrong (or not close enough), so the stored set
//! concentrates near decision boundaries. The same machinery serves
//! classification, regression and approximate nearest-neighbor retrieval, and
//! learning is immediate: a training example is usable by the very next query.
//!
//! ```
//! use boundary_forest::{BoundaryForest, DataPoint, ForestConfig, LabelVector, Position, TaskMode};
//!
//! let config = ForestConfig {
//!     mode: TaskMode::Classification,
//!     trees: 3,
//!     ..ForestConfig::default()
//! };
//! let mut forest = BoundaryForest::new(config).unwrap();
//! let corners = [([0.0, 0.0], 0), ([1.0, 0.0], 1), ([0.0, 1.0], 0), ([1.0, 1.0], 1)];
//! for (xy, class) in corners {
//!     forest.train(DataPoint {
//!         position: Position::new(xy.to_vec()).unwrap(),
//!         label: LabelVector::indicator(class, 2).unwrap(),
//!     }).unwrap();
//! }
//! let query = Position::new(vec![0.9, 0.1]).unwrap();
//! assert_eq!(forest.classify(&query).unwrap(), 1);
//! ```
//!
//! Besides the learner itself ([`forest`] and [`tree`]), the crate ships exact
//! brute-force oracles and evaluation helpers ([`eval`]) and a small lab for
//! measuring and fitting query-cost growth curves on synthetic data
//! ([`scaling`]).

pub mod data;
pub mod eval;
pub mod forest;
pub mod metric;
pub mod scaling;
pub mod seed;
pub mod tree;

pub use data::{DataError, DataPoint, ExampleId, ExampleStore, LabelVector, Position};
pub use eval::{
    brute_knn, error_rate, offline_bf_error, regression_rmse, retrieval_fraction,
    retrieval_fraction_of, retrieval_ranks, EvalError, RankResult,
};
pub use forest::{
    shepard_estimate, BoundaryForest, ForestConfig, ForestError, Hit, Prediction, TaskMode,
    TrainReport, TreeHit,
};
pub use metric::{LabelDistance, LabelMetric, PositionMetric};
pub use scaling::{
    artificial_tree_sim, dimension_sweep, fit_and_select, log_checkpoints, measure_scaling,
    ArtificialTreeSim, FitFamily, FitReport, FitSelection, MixtureComponent, ScalingCurve,
    ScalingError, ScalingRunConfig, SyntheticSource,
};
pub use tree::{
    BTNode, BoundaryTree, ChildCap, NodeId, QueryStats, TrainOutcome, TreeConfig, TreeError,
    TreeShape,
};
