//! The boundary forest: several trees, one example store, one estimator.
//!
//! A forest owns `n_T` boundary trees over a single append-only store. The
//! first `n_T` training points are buffered; when the last one arrives, tree
//! `i` is rooted at point `i` and trained on the other buffered points in its
//! own seeded shuffle order, which decorrelates the trees. From then on
//! training is strictly online: every tree sees every example, each decides
//! independently whether to keep it, and an example kept by any tree is
//! appended to the shared store exactly once.
//!
//! Queries fan out to all trees, take each tree's locally closest node, and
//! combine them: retrieval answers with the closest hit overall, while
//! classification and regression answer with an inverse-distance-weighted
//! (Shepard) average of the hit labels.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::data::{DataError, DataPoint, ExampleId, ExampleStore, LabelVector, Position};
use crate::metric::{LabelMetric, PositionMetric};
use crate::seed;
use crate::tree::{BoundaryTree, ChildCap, NodeId, QueryStats, TreeConfig, TreeError};

#[derive(Debug, Error, PartialEq)]
pub enum ForestError {
    #[error("forest needs at least one tree")]
    NoTrees,
    #[error("forest has no examples")]
    Empty,
    #[error("forest is already initialized")]
    AlreadyInitialized,
    #[error("initialization needs exactly {expected} points, got {got}")]
    WrongInitCount { expected: usize, got: usize },
    #[error("{got} examples cannot initialize a forest of {trees} trees")]
    TooFewExamples { got: usize, trees: usize },
    #[error("estimate needs at least one result")]
    EmptyEstimate,
    #[error("distances must be finite and non-negative, got {0}")]
    BadDistance(f64),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Data(#[from] DataError),
}

/// What the forest is learning. The mode fixes the label metric and the
/// training tolerance for every tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TaskMode {
    /// Labels are class indicators; an example is stored when its class
    /// differs from the prediction.
    Classification,
    /// Labels are real vectors; an example is stored when some coordinate of
    /// the prediction is off by more than `epsilon`.
    Regression { epsilon: f64 },
    /// Labels mirror positions and every example is stored.
    Retrieval,
}

impl TaskMode {
    pub fn label_metric(self) -> LabelMetric {
        match self {
            TaskMode::Classification => LabelMetric::Discrete,
            TaskMode::Regression { .. } => LabelMetric::AbsoluteDifference,
            TaskMode::Retrieval => LabelMetric::AlwaysFar,
        }
    }

    pub fn epsilon(self) -> f64 {
        match self {
            TaskMode::Regression { epsilon } => epsilon,
            _ => 0.0,
        }
    }
}

/// Forest-wide parameters, shared by every tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForestConfig {
    pub mode: TaskMode,
    /// Number of trees, `n_T`.
    pub trees: usize,
    /// Child cap `k`, identical for all trees.
    pub cap: ChildCap,
    pub metric: PositionMetric,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            mode: TaskMode::Classification,
            trees: 50,
            cap: ChildCap::Finite(50),
            metric: PositionMetric::Euclidean,
            seed: 0,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<(), ForestError> {
        if self.trees == 0 {
            return Err(ForestError::NoTrees);
        }
        self.tree_config().validate()?;
        Ok(())
    }

    fn tree_config(&self) -> TreeConfig {
        TreeConfig {
            cap: self.cap,
            epsilon: self.mode.epsilon(),
            position_metric: self.metric,
            label_metric: self.mode.label_metric(),
        }
    }
}

/// A stored example together with its distance to the query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub example: ExampleId,
    pub distance: f64,
}

/// One tree's answer to a query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeHit {
    pub node: NodeId,
    pub example: ExampleId,
    pub distance: f64,
}

/// Combined answer of the forest.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    /// Estimated label: the Shepard average for classification/regression,
    /// the nearest hit's stored label (its position) for retrieval.
    pub label: LabelVector,
    /// Closest hit across trees; ties resolve to the lowest tree index.
    pub nearest: Hit,
    /// Per-tree hits, indexed by tree. Empty while the forest is still
    /// buffering toward initialization.
    pub per_tree: Vec<TreeHit>,
}

/// Result of feeding one training point to the forest.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Per-tree added flags. Empty for a point that was buffered.
    pub added: Vec<bool>,
    /// The example's store id, when at least one tree kept it.
    pub example: Option<ExampleId>,
    /// Whether the point was absorbed into the initialization buffer.
    pub buffered: bool,
    /// Query work done by the embedded per-tree queries.
    pub stats: QueryStats,
}

/// Inverse-distance-weighted average of labels: each label is weighted by
/// the reciprocal of its distance. If any distance is zero (or so small its
/// reciprocal overflows), the estimate is instead the plain average of
/// exactly those labels; that limit is what makes a just-trained point
/// predict its own label.
pub fn shepard_estimate(results: &[(LabelVector, f64)]) -> Result<LabelVector, ForestError> {
    let refs: Vec<(&[f64], f64)> = results.iter().map(|(l, d)| (l.values(), *d)).collect();
    Ok(LabelVector::new(shepard(&refs)?)?)
}

fn shepard(results: &[(&[f64], f64)]) -> Result<Vec<f64>, ForestError> {
    let Some(&(first, _)) = results.first() else {
        return Err(ForestError::EmptyEstimate);
    };
    let dim = first.len();
    for &(label, d) in results {
        if label.len() != dim {
            return Err(DataError::DimensionMismatch { expected: dim, got: label.len() }.into());
        }
        if !d.is_finite() || d < 0.0 {
            return Err(ForestError::BadDistance(d));
        }
    }
    let mut out = vec![0.0; dim];
    let exact: Vec<&[f64]> = results
        .iter()
        .filter(|&&(_, d)| (1.0 / d).is_infinite())
        .map(|&(label, _)| label)
        .collect();
    if !exact.is_empty() {
        for label in &exact {
            for (o, v) in out.iter_mut().zip(*label) {
                *o += v;
            }
        }
        let n = exact.len() as f64;
        for o in &mut out {
            *o /= n;
        }
    } else {
        let mut weight_sum = 0.0;
        for &(label, d) in results {
            let w = 1.0 / d;
            weight_sum += w;
            for (o, v) in out.iter_mut().zip(label) {
                *o += v * w;
            }
        }
        for o in &mut out {
            *o /= weight_sum;
        }
    }
    Ok(out)
}

/// Index of the closest hit; ties resolve to the lowest tree index.
fn nearest_index(hits: &[TreeHit]) -> usize {
    let mut best = 0;
    for (i, hit) in hits.iter().enumerate().skip(1) {
        if hit.distance < hits[best].distance {
            best = i;
        }
    }
    best
}

/// In retrieval mode labels mirror positions; other modes keep the label.
fn adapt(mode: TaskMode, point: DataPoint) -> DataPoint {
    match mode {
        TaskMode::Retrieval => {
            let label = LabelVector::new(point.position.coords().to_vec())
                .expect("positions are non-empty and finite");
            DataPoint { position: point.position, label }
        }
        _ => point,
    }
}

/// An online boundary forest.
#[derive(Debug, Clone)]
pub struct BoundaryForest {
    config: ForestConfig,
    store: ExampleStore,
    trees: Vec<BoundaryTree>,
    buffer: Vec<DataPoint>,
    initialized: bool,
}

impl BoundaryForest {
    /// An empty forest. The first `config.trees` training points are
    /// buffered; initialization runs by itself when the last one arrives.
    pub fn new(config: ForestConfig) -> Result<Self, ForestError> {
        config.validate()?;
        let tree_config = config.tree_config();
        let trees = (0..config.trees)
            .map(|i| BoundaryTree::new(tree_config, seed::split(config.seed, i as u64)))
            .collect::<Result<_, _>>()?;
        Ok(Self { config, store: ExampleStore::new(), trees, buffer: Vec::new(), initialized: false })
    }

    /// An offline forest: every tree is trained on its own full reshuffle of
    /// `points`, rooted at the first point of its shuffle.
    pub fn offline(config: ForestConfig, points: &[DataPoint]) -> Result<Self, ForestError> {
        let mut forest = Self::new(config)?;
        if points.len() < config.trees {
            return Err(ForestError::TooFewExamples { got: points.len(), trees: config.trees });
        }
        for point in points {
            forest.store.append(adapt(config.mode, point.clone()))?;
        }
        let n = points.len();
        let Self { trees, store, .. } = &mut forest;
        trees
            .par_iter_mut()
            .enumerate()
            .try_for_each(|(i, tree)| -> Result<(), ForestError> {
                let mut order: Vec<u32> = (0..n as u32).collect();
                let mut rng = ChaCha8Rng::seed_from_u64(seed::tree_stream(
                    config.seed,
                    seed::stream::SHUFFLE,
                    i,
                ));
                order.shuffle(&mut rng);
                tree.set_root(ExampleId(order[0]))?;
                let mut stats = QueryStats::default();
                for &j in &order[1..] {
                    tree.train_stored(store, ExampleId(j), &mut stats)?;
                }
                Ok(())
            })?;
        forest.initialized = true;
        Ok(forest)
    }

    pub fn config(&self) -> &ForestConfig {
        &self.config
    }

    pub fn store(&self) -> &ExampleStore {
        &self.store
    }

    pub fn trees(&self) -> &[BoundaryTree] {
        &self.trees
    }

    pub fn is_initialized(&self) -> bool {
        self.initialized
    }

    /// Points received so far but not yet formed into trees.
    pub fn buffered(&self) -> usize {
        self.buffer.len()
    }

    /// Feed the forest the first `n_T` points in one call instead of one
    /// `train` at a time. Fails if any point has already been seen.
    pub fn initialize(&mut self, points: Vec<DataPoint>) -> Result<(), ForestError> {
        if self.initialized {
            return Err(ForestError::AlreadyInitialized);
        }
        if !self.buffer.is_empty() || points.len() != self.config.trees {
            return Err(ForestError::WrongInitCount {
                expected: self.config.trees - self.buffer.len(),
                got: points.len(),
            });
        }
        for point in points {
            self.train(point)?;
        }
        Ok(())
    }

    /// One online training step. Until `n_T` points have arrived the point
    /// is buffered (the last arrival triggers initialization); afterwards
    /// every tree decides independently and the example is stored at most
    /// once.
    pub fn train(&mut self, point: DataPoint) -> Result<TrainReport, ForestError> {
        let point = adapt(self.config.mode, point);
        if !self.initialized {
            self.check_dims(&point, self.buffer.first())?;
            self.buffer.push(point);
            let mut stats = QueryStats::default();
            if self.buffer.len() == self.config.trees {
                stats = self.initialize_from_buffer()?;
            }
            return Ok(TrainReport { added: Vec::new(), example: None, buffered: true, stats });
        }
        self.check_dims(&point, Some(self.store.get(ExampleId(0))))?;

        let Self { trees, store, .. } = &mut *self;
        let decisions: Vec<(NodeId, bool, QueryStats)> = if trees.len() == 1 {
            let mut stats = QueryStats::default();
            let (node, add) = trees[0].decide(store, &point, &mut stats)?;
            vec![(node, add, stats)]
        } else {
            trees
                .par_iter_mut()
                .map(|tree| {
                    let mut stats = QueryStats::default();
                    let (node, add) = tree.decide(store, &point, &mut stats)?;
                    Ok((node, add, stats))
                })
                .collect::<Result<_, ForestError>>()?
        };

        let example = if decisions.iter().any(|&(_, add, _)| add) {
            Some(self.store.append(point)?)
        } else {
            None
        };
        if let Some(id) = example {
            for (tree, &(node, add, _)) in self.trees.iter_mut().zip(&decisions) {
                if add {
                    tree.attach(node, id);
                }
            }
        }
        let mut stats = QueryStats::default();
        for &(_, _, s) in &decisions {
            stats.absorb(s);
        }
        Ok(TrainReport {
            added: decisions.iter().map(|&(_, add, _)| add).collect(),
            example,
            buffered: false,
            stats,
        })
    }

    fn check_dims(&self, point: &DataPoint, against: Option<&DataPoint>) -> Result<(), ForestError> {
        let Some(reference) = against else { return Ok(()) };
        if point.position.dim() != reference.position.dim() {
            return Err(DataError::DimensionMismatch {
                expected: reference.position.dim(),
                got: point.position.dim(),
            }
            .into());
        }
        if point.label.dim() != reference.label.dim() {
            return Err(DataError::DimensionMismatch {
                expected: reference.label.dim(),
                got: point.label.dim(),
            }
            .into());
        }
        Ok(())
    }

    /// Move the buffer into the store, root tree `i` at buffered point `i`,
    /// and train each tree on the other points in its own shuffle order.
    fn initialize_from_buffer(&mut self) -> Result<QueryStats, ForestError> {
        debug_assert_eq!(self.buffer.len(), self.config.trees);
        let points = std::mem::take(&mut self.buffer);
        let mut ids = Vec::with_capacity(points.len());
        for point in points {
            ids.push(self.store.append(point)?);
        }
        let Self { trees, store, config, .. } = &mut *self;
        let master = config.seed;
        let per_tree: Vec<QueryStats> = trees
            .par_iter_mut()
            .enumerate()
            .map(|(i, tree)| -> Result<QueryStats, ForestError> {
                tree.set_root(ids[i])?;
                let mut order: Vec<usize> = (0..ids.len()).filter(|&j| j != i).collect();
                let mut rng = ChaCha8Rng::seed_from_u64(seed::tree_stream(
                    master,
                    seed::stream::SHUFFLE,
                    i,
                ));
                order.shuffle(&mut rng);
                let mut stats = QueryStats::default();
                for j in order {
                    tree.train_stored(store, ids[j], &mut stats)?;
                }
                Ok(stats)
            })
            .collect::<Result<_, _>>()?;
        self.initialized = true;
        let mut stats = QueryStats::default();
        for s in per_tree {
            stats.absorb(s);
        }
        Ok(stats)
    }

    /// Combined forest answer for `y`, using the nonce-0 query stream.
    pub fn query(&self, y: &Position) -> Result<Prediction, ForestError> {
        self.query_with_nonce(y, 0)
    }

    /// Combined forest answer with per-query tie-break streams; use a
    /// distinct nonce per query for independent tie-breaks, or the same
    /// nonce to replay a query exactly.
    pub fn query_with_nonce(&self, y: &Position, nonce: u64) -> Result<Prediction, ForestError> {
        Ok(self.query_traced(y, nonce)?.0)
    }

    /// Like [`query_with_nonce`](Self::query_with_nonce), also returning the
    /// query work summed over trees.
    pub fn query_traced(
        &self,
        y: &Position,
        nonce: u64,
    ) -> Result<(Prediction, QueryStats), ForestError> {
        if !self.initialized {
            return self.query_buffer(y);
        }
        let dim = self.store.position_dim().expect("initialized forest has examples");
        if y.dim() != dim {
            return Err(DataError::DimensionMismatch { expected: dim, got: y.dim() }.into());
        }

        let run = |tree: &BoundaryTree| -> Result<(TreeHit, QueryStats), ForestError> {
            let mut stats = QueryStats::default();
            let node = tree.query_with_nonce(&self.store, y, nonce, &mut stats)?;
            let example = tree.nodes()[node.index()].example;
            let distance =
                self.config.metric.raw(self.store.get(example).position.coords(), y.coords());
            Ok((TreeHit { node, example, distance }, stats))
        };
        let answers: Vec<(TreeHit, QueryStats)> = if self.trees.len() == 1 {
            vec![run(&self.trees[0])?]
        } else {
            self.trees.par_iter().map(run).collect::<Result<_, _>>()?
        };

        let hits: Vec<TreeHit> = answers.iter().map(|&(hit, _)| hit).collect();
        let mut stats = QueryStats::default();
        for &(_, s) in &answers {
            stats.absorb(s);
        }
        let best = &hits[nearest_index(&hits)];
        let label = match self.config.mode {
            TaskMode::Retrieval => self.store.get(best.example).label.clone(),
            _ => {
                let results: Vec<(&[f64], f64)> = hits
                    .iter()
                    .map(|hit| (self.store.get(hit.example).label.values(), hit.distance))
                    .collect();
                LabelVector::new(shepard(&results)?)?
            }
        };
        let nearest = Hit { example: best.example, distance: best.distance };
        Ok((Prediction { label, nearest, per_tree: hits }, stats))
    }

    /// Brute-force fallback over the initialization buffer, so queries work
    /// from the very first training point.
    fn query_buffer(&self, y: &Position) -> Result<(Prediction, QueryStats), ForestError> {
        let Some(first) = self.buffer.first() else {
            return Err(ForestError::Empty);
        };
        if y.dim() != first.position.dim() {
            return Err(DataError::DimensionMismatch {
                expected: first.position.dim(),
                got: y.dim(),
            }
            .into());
        }
        let mut nearest = Hit { example: ExampleId(0), distance: f64::INFINITY };
        let mut results: Vec<(&[f64], f64)> = Vec::with_capacity(self.buffer.len());
        for (i, point) in self.buffer.iter().enumerate() {
            let d = self.config.metric.raw(point.position.coords(), y.coords());
            if d < nearest.distance {
                nearest = Hit { example: ExampleId(i as u32), distance: d };
            }
            results.push((point.label.values(), d));
        }
        let label = match self.config.mode {
            TaskMode::Retrieval => self.buffer[nearest.example.index()].label.clone(),
            _ => LabelVector::new(shepard(&results)?)?,
        };
        let stats =
            QueryStats { metric_comparisons: self.buffer.len() as u64, path_length: 0 };
        Ok((Prediction { label, nearest, per_tree: Vec::new() }, stats))
    }

    /// Class estimate for `y`: argmax of the combined label, lowest index on
    /// ties.
    pub fn classify(&self, y: &Position) -> Result<usize, ForestError> {
        Ok(self.query(y)?.label.argmax())
    }
}
