//! Boundary trees: shallow search trees traversed greedily by distance.
//!
//! Every node holds a stored example. A query walks from the root, at each
//! node comparing the query against the node's children, and against the node
//! itself while it still has room for another child. The walk stops at a
//! "locally closest" node: none of its children are closer, and, if it is not
//! full, it beats its children too. A full node can never be the stopping
//! point, which is what bounds query cost when the child cap is finite.
//!
//! Training is a query followed by a conditional insert: the new example
//! becomes a child of the stopping node only when that node's label is not
//! close enough to the example's label.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::data::{DataError, DataPoint, ExampleId, ExampleStore, Position};
use crate::metric::{LabelMetric, PositionMetric};
use crate::seed;

#[derive(Debug, Error, PartialEq)]
pub enum TreeError {
    #[error("tree has no root")]
    Empty,
    #[error("tree already has a root")]
    AlreadyRooted,
    #[error("child cap must be at least 2, got {0}")]
    CapTooSmall(u32),
    #[error("epsilon must be finite and non-negative, got {0}")]
    BadEpsilon(f64),
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Maximum number of children per node. Finite caps must be at least 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChildCap {
    Finite(u32),
    Unbounded,
}

impl ChildCap {
    /// Whether a node with `children` children still has room for one more.
    /// A node with room competes against its own children during a query; a
    /// full node does not, so a query can never stop there.
    #[inline]
    pub fn admits(self, children: usize) -> bool {
        match self {
            ChildCap::Finite(k) => children < k as usize,
            ChildCap::Unbounded => true,
        }
    }

    pub fn validate(self) -> Result<(), TreeError> {
        match self {
            ChildCap::Finite(k) if k < 2 => Err(TreeError::CapTooSmall(k)),
            _ => Ok(()),
        }
    }
}

impl FromStr for ChildCap {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinite") {
            return Ok(ChildCap::Unbounded);
        }
        let k: u32 = s.parse().map_err(|_| format!("expected an integer or \"inf\", got {s:?}"))?;
        if k < 2 {
            return Err(format!("child cap must be at least 2, got {k}"));
        }
        Ok(ChildCap::Finite(k))
    }
}

impl fmt::Display for ChildCap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChildCap::Finite(k) => write!(f, "{k}"),
            ChildCap::Unbounded => write!(f, "inf"),
        }
    }
}

/// Index of a node within one tree. Nodes are created in insertion order, so
/// a child's index is always greater than its parent's.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// One tree node: the example it stores and its children, oldest first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BTNode {
    pub example: ExampleId,
    pub children: Vec<NodeId>,
}

/// Work counters for queries. Both counters only ever increase while a query
/// runs; `metric_comparisons` is bumped once per position-metric evaluation,
/// which is the unit all scaling benchmarks are reported in.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct QueryStats {
    pub metric_comparisons: u64,
    pub path_length: u64,
}

impl QueryStats {
    pub fn absorb(&mut self, other: QueryStats) {
        self.metric_comparisons += other.metric_comparisons;
        self.path_length += other.path_length;
    }
}

/// Shared per-tree parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeConfig {
    pub cap: ChildCap,
    /// Label distance above which a training example is stored.
    pub epsilon: f64,
    pub position_metric: PositionMetric,
    pub label_metric: LabelMetric,
}

impl Default for TreeConfig {
    fn default() -> Self {
        Self {
            cap: ChildCap::Finite(50),
            epsilon: 0.0,
            position_metric: PositionMetric::Euclidean,
            label_metric: LabelMetric::Discrete,
        }
    }
}

impl TreeConfig {
    pub fn validate(&self) -> Result<(), TreeError> {
        self.cap.validate()?;
        if !self.epsilon.is_finite() || self.epsilon < 0.0 {
            return Err(TreeError::BadEpsilon(self.epsilon));
        }
        Ok(())
    }
}

/// Result of one training step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainOutcome {
    /// The node the embedded query stopped at.
    pub closest: NodeId,
    /// Whether the example was attached beneath `closest`.
    pub added: bool,
}

/// Depth and fanout histograms of a tree, keyed by depth (root = 0) and by
/// child count respectively.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct TreeShape {
    pub depths: BTreeMap<usize, u64>,
    pub fanout: BTreeMap<usize, u64>,
}

impl TreeShape {
    pub fn max_depth(&self) -> usize {
        self.depths.keys().next_back().copied().unwrap_or(0)
    }
}

/// A single boundary tree over a shared example store.
///
/// The tree owns a seeded RNG for tie-breaks taken while training, so a
/// training run is a pure function of (seed, parameters, input order).
/// Queries are read-only; their tie-breaks draw from an ephemeral stream
/// derived from the tree's seed and a caller-chosen nonce, so results do not
/// depend on how queries are scheduled across threads.
#[derive(Debug, Clone)]
pub struct BoundaryTree {
    config: TreeConfig,
    nodes: Vec<BTNode>,
    train_rng: ChaCha8Rng,
    tie_seed: u64,
}

impl BoundaryTree {
    pub fn new(config: TreeConfig, seed: u64) -> Result<Self, TreeError> {
        config.validate()?;
        Ok(Self {
            config,
            nodes: Vec::new(),
            train_rng: ChaCha8Rng::seed_from_u64(seed::split(seed, seed::stream::TRAIN)),
            tie_seed: seed::split(seed, seed::stream::TIE),
        })
    }

    pub fn config(&self) -> &TreeConfig {
        &self.config
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[BTNode] {
        &self.nodes
    }

    pub fn root(&self) -> Option<NodeId> {
        if self.nodes.is_empty() {
            None
        } else {
            Some(NodeId(0))
        }
    }

    pub fn root_fanout(&self) -> Option<usize> {
        self.nodes.first().map(|n| n.children.len())
    }

    /// Install the root example. Fails on a non-empty tree.
    pub fn set_root(&mut self, example: ExampleId) -> Result<NodeId, TreeError> {
        if !self.nodes.is_empty() {
            return Err(TreeError::AlreadyRooted);
        }
        self.nodes.push(BTNode { example, children: Vec::new() });
        Ok(NodeId(0))
    }

    fn check_dim(&self, store: &ExampleStore, y: &Position) -> Result<(), TreeError> {
        if let Some(dim) = store.position_dim() {
            if y.dim() != dim {
                return Err(DataError::DimensionMismatch { expected: dim, got: y.dim() }.into());
            }
        }
        Ok(())
    }

    /// Locally closest node for `y`. Read-only; tie-breaks draw from the
    /// nonce-0 query stream.
    pub fn query(
        &self,
        store: &ExampleStore,
        y: &Position,
        stats: &mut QueryStats,
    ) -> Result<NodeId, TreeError> {
        self.query_with_nonce(store, y, 0, stats)
    }

    /// Locally closest node for `y`, with tie-breaks drawn from the query
    /// stream selected by `nonce`. Distinct nonces give independent streams;
    /// the same nonce always replays the same choices.
    pub fn query_with_nonce(
        &self,
        store: &ExampleStore,
        y: &Position,
        nonce: u64,
        stats: &mut QueryStats,
    ) -> Result<NodeId, TreeError> {
        if self.nodes.is_empty() {
            return Err(TreeError::Empty);
        }
        self.check_dim(store, y)?;
        let mut rng = self.tie_rng(nonce);
        let v = descend(
            &self.nodes,
            store,
            self.config.position_metric,
            self.config.cap,
            y.coords(),
            &mut rng,
            stats,
            None,
        );
        Ok(NodeId(v as u32))
    }

    /// Like [`query_with_nonce`](Self::query_with_nonce), but also returns
    /// every node visited, root first, stopping node last.
    pub fn query_path(
        &self,
        store: &ExampleStore,
        y: &Position,
        nonce: u64,
        stats: &mut QueryStats,
    ) -> Result<Vec<NodeId>, TreeError> {
        if self.nodes.is_empty() {
            return Err(TreeError::Empty);
        }
        self.check_dim(store, y)?;
        let mut rng = self.tie_rng(nonce);
        let mut path = Vec::new();
        descend(
            &self.nodes,
            store,
            self.config.position_metric,
            self.config.cap,
            y.coords(),
            &mut rng,
            stats,
            Some(&mut path),
        );
        Ok(path)
    }

    fn tie_rng(&self, nonce: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed::split(self.tie_seed, nonce))
    }

    /// Train on an example that is not yet in the store: query, and if the
    /// stopping node's label is too far from the example's, append the
    /// example to the store and attach it there.
    pub fn train(
        &mut self,
        store: &mut ExampleStore,
        point: &DataPoint,
        stats: &mut QueryStats,
    ) -> Result<TrainOutcome, TreeError> {
        let (closest, add) = self.decide(store, point, stats)?;
        if !add {
            return Ok(TrainOutcome { closest, added: false });
        }
        let id = store.append(point.clone())?;
        self.attach(closest, id);
        Ok(TrainOutcome { closest, added: true })
    }

    /// Train on an example already present in the store (it keeps its id; no
    /// second copy is made).
    pub fn train_stored(
        &mut self,
        store: &ExampleStore,
        id: ExampleId,
        stats: &mut QueryStats,
    ) -> Result<TrainOutcome, TreeError> {
        let (closest, add) = self.decide(store, store.get(id), stats)?;
        if add {
            self.attach(closest, id);
        }
        Ok(TrainOutcome { closest, added: add })
    }

    /// The query half of training: descends with the tree's own training RNG
    /// and reports where the example would attach and whether it should.
    pub(crate) fn decide(
        &mut self,
        store: &ExampleStore,
        point: &DataPoint,
        stats: &mut QueryStats,
    ) -> Result<(NodeId, bool), TreeError> {
        if self.nodes.is_empty() {
            return Err(TreeError::Empty);
        }
        self.check_dim(store, &point.position)?;
        let Self { config, nodes, train_rng, .. } = self;
        let v = descend(
            nodes,
            store,
            config.position_metric,
            config.cap,
            point.position.coords(),
            train_rng,
            stats,
            None,
        );
        let stored = store.get(nodes[v].example);
        let gap = config.label_metric.distance(&stored.label, &point.label)?;
        Ok((NodeId(v as u32), gap.exceeds(config.epsilon)))
    }

    /// Attach `example` as a new child of `parent`. The caller guarantees
    /// `parent` has room (a query can only stop at a node with room).
    pub(crate) fn attach(&mut self, parent: NodeId, example: ExampleId) -> NodeId {
        debug_assert!(self.config.cap.admits(self.nodes[parent.index()].children.len()));
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(BTNode { example, children: Vec::new() });
        self.nodes[parent.index()].children.push(id);
        id
    }

    /// Depth and fanout histograms. Exact, no mutation.
    pub fn depth_and_fanout(&self) -> TreeShape {
        let mut shape = TreeShape::default();
        let mut depth = vec![0u32; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            *shape.fanout.entry(node.children.len()).or_insert(0) += 1;
            *shape.depths.entry(depth[i] as usize).or_insert(0) += 1;
            for child in &node.children {
                depth[child.index()] = depth[i] + 1;
            }
        }
        shape
    }
}

/// Candidate slot meaning "the current node itself" rather than a child.
const SELF: usize = usize::MAX;

/// Greedy descent from the root. At each node, the candidates are its
/// children, plus the node itself while it has room for another child; the
/// walk moves to the closest candidate (ties uniform at random) and stops
/// when the node itself wins. Returns the stopping node's index and, when
/// `path` is given, records every visited node.
#[allow(clippy::too_many_arguments)]
fn descend(
    nodes: &[BTNode],
    store: &ExampleStore,
    metric: PositionMetric,
    cap: ChildCap,
    y: &[f64],
    rng: &mut ChaCha8Rng,
    stats: &mut QueryStats,
    mut path: Option<&mut Vec<NodeId>>,
) -> usize {
    let mut v = 0usize;
    let mut ties: Vec<usize> = Vec::new();
    loop {
        stats.path_length += 1;
        if let Some(path) = path.as_deref_mut() {
            path.push(NodeId(v as u32));
        }
        let node = &nodes[v];
        let mut best = f64::INFINITY;
        ties.clear();
        for (slot, child) in node.children.iter().enumerate() {
            let pos = store.get(nodes[child.index()].example).position.coords();
            let d = metric.raw(pos, y);
            stats.metric_comparisons += 1;
            if d < best {
                best = d;
                ties.clear();
                ties.push(slot);
            } else if d == best {
                ties.push(slot);
            }
        }
        if cap.admits(node.children.len()) {
            let d = metric.raw(store.get(node.example).position.coords(), y);
            stats.metric_comparisons += 1;
            if d < best {
                ties.clear();
                ties.push(SELF);
            } else if d == best {
                ties.push(SELF);
            }
        }
        let winner = if ties.len() == 1 { ties[0] } else { ties[rng.random_range(0..ties.len())] };
        if winner == SELF {
            return v;
        }
        v = node.children[winner].index();
    }
}
