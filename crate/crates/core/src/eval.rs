//! Exact oracles and evaluation protocols: brute-force nearest neighbors,
//! retrieval rank fractions, classification error rates, and the
//! online-versus-offline comparison.
//!
//! Everything here is read-only over a frozen forest or store and
//! parallelizes across queries. All floating-point reductions collect
//! per-query values in input order and reduce sequentially, so results do
//! not depend on thread count.

use rayon::prelude::*;
use thiserror::Error;

use crate::data::{DataPoint, ExampleId, ExampleStore, Position};
use crate::forest::{BoundaryForest, ForestConfig, ForestError, Hit, TaskMode};
use crate::metric::PositionMetric;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("store is empty")]
    EmptyStore,
    #[error("query set is empty")]
    NoQueries,
    #[error("test set is empty")]
    NoTestPoints,
    #[error("requested {k} neighbors from {count} examples")]
    KTooLarge { k: usize, count: usize },
    #[error("percentile must lie in (0, 1], got {0}")]
    BadPercentile(f64),
    #[error("operation requires {expected} mode")]
    WrongMode { expected: &'static str },
    #[error(transparent)]
    Forest(#[from] ForestError),
}

/// Rank bookkeeping for one retrieval query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankResult {
    /// Index of the query in its batch.
    pub query: usize,
    /// The example the retriever returned.
    pub example: ExampleId,
    /// 1-based position of `example` among all stored examples ordered by
    /// distance to the query. Equidistant examples resolve in the returned
    /// example's favor, so rank = 1 + (number strictly closer).
    pub rank: usize,
    /// rank / store size, in (0, 1].
    pub fraction: f64,
}

/// Exact k nearest stored examples, sorted ascending by distance; ties sort
/// by lower id.
pub fn brute_knn(
    store: &ExampleStore,
    metric: PositionMetric,
    y: &Position,
    k: usize,
) -> Result<Vec<Hit>, EvalError> {
    if store.is_empty() {
        return Err(EvalError::EmptyStore);
    }
    if k > store.len() {
        return Err(EvalError::KTooLarge { k, count: store.len() });
    }
    let mut hits: Vec<Hit> = store
        .iter()
        .map(|(id, p)| Hit {
            example: id,
            distance: metric.raw(p.position.coords(), y.coords()),
        })
        .collect();
    hits.sort_unstable_by(|a, b| {
        a.distance.total_cmp(&b.distance).then(a.example.cmp(&b.example))
    });
    hits.truncate(k);
    Ok(hits)
}

/// Rank of `example` among all stored examples by distance to `y`.
fn rank_of(
    store: &ExampleStore,
    metric: PositionMetric,
    y: &Position,
    example: ExampleId,
    query: usize,
) -> RankResult {
    let returned = metric.raw(store.get(example).position.coords(), y.coords());
    let closer = store
        .iter()
        .filter(|(_, p)| metric.raw(p.position.coords(), y.coords()) < returned)
        .count();
    let rank = closer + 1;
    RankResult { query, example, rank, fraction: rank as f64 / store.len() as f64 }
}

/// Rank every query's retrieved example against the full store. `retrieve`
/// maps (query index, query) to the returned example id.
pub fn retrieval_ranks<F>(
    store: &ExampleStore,
    metric: PositionMetric,
    queries: &[Position],
    retrieve: F,
) -> Result<Vec<RankResult>, EvalError>
where
    F: Fn(usize, &Position) -> Result<ExampleId, EvalError> + Sync,
{
    if store.is_empty() {
        return Err(EvalError::EmptyStore);
    }
    if queries.is_empty() {
        return Err(EvalError::NoQueries);
    }
    queries
        .par_iter()
        .enumerate()
        .map(|(i, y)| Ok(rank_of(store, metric, y, retrieve(i, y)?, i)))
        .collect()
}

/// The `percentile` quantile of rank fractions over `queries`, for an
/// arbitrary retriever. The quantile is the smallest fraction f such that at
/// least `percentile` of the queries have fraction ≤ f.
pub fn retrieval_fraction_of<F>(
    store: &ExampleStore,
    metric: PositionMetric,
    queries: &[Position],
    percentile: f64,
    retrieve: F,
) -> Result<f64, EvalError>
where
    F: Fn(usize, &Position) -> Result<ExampleId, EvalError> + Sync,
{
    if !(percentile > 0.0 && percentile <= 1.0) {
        return Err(EvalError::BadPercentile(percentile));
    }
    let ranks = retrieval_ranks(store, metric, queries, retrieve)?;
    let mut fractions: Vec<f64> = ranks.iter().map(|r| r.fraction).collect();
    fractions.sort_unstable_by(f64::total_cmp);
    let index = ((percentile * fractions.len() as f64).ceil() as usize).max(1) - 1;
    Ok(fractions[index.min(fractions.len() - 1)])
}

/// The `percentile` quantile of rank fractions for a retrieval forest,
/// evaluated against its own store.
pub fn retrieval_fraction(
    forest: &BoundaryForest,
    queries: &[Position],
    percentile: f64,
) -> Result<f64, EvalError> {
    if forest.config().mode != TaskMode::Retrieval {
        return Err(EvalError::WrongMode { expected: "retrieval" });
    }
    retrieval_fraction_of(
        forest.store(),
        forest.config().metric,
        queries,
        percentile,
        |i, y| Ok(forest.query_with_nonce(y, i as u64)?.nearest.example),
    )
}

/// Percentage of test points whose predicted class differs from the true
/// class (the argmax of the stored label).
pub fn error_rate(forest: &BoundaryForest, test: &[DataPoint]) -> Result<f64, EvalError> {
    if forest.config().mode != TaskMode::Classification {
        return Err(EvalError::WrongMode { expected: "classification" });
    }
    if test.is_empty() {
        return Err(EvalError::NoTestPoints);
    }
    let wrong: Vec<bool> = test
        .par_iter()
        .enumerate()
        .map(|(i, point)| {
            let predicted = forest.query_with_nonce(&point.position, i as u64)?.label.argmax();
            Ok::<bool, ForestError>(predicted != point.label.argmax())
        })
        .collect::<Result<_, _>>()?;
    let errors = wrong.iter().filter(|&&w| w).count();
    Ok(100.0 * errors as f64 / test.len() as f64)
}

/// Root-mean-square error of the forest's label estimate over a test set,
/// taken across every label coordinate of every test point.
pub fn regression_rmse(forest: &BoundaryForest, test: &[DataPoint]) -> Result<f64, EvalError> {
    if test.is_empty() {
        return Err(EvalError::NoTestPoints);
    }
    let per_point: Vec<(f64, usize)> = test
        .par_iter()
        .enumerate()
        .map(|(i, point)| {
            let estimate = forest.query_with_nonce(&point.position, i as u64)?.label;
            let sq: f64 = estimate
                .values()
                .iter()
                .zip(point.label.values())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            Ok::<(f64, usize), ForestError>((sq, point.label.dim()))
        })
        .collect::<Result<_, _>>()?;
    let total_sq: f64 = per_point.iter().map(|&(sq, _)| sq).sum();
    let total_coords: usize = per_point.iter().map(|&(_, d)| d).sum();
    Ok((total_sq / total_coords as f64).sqrt())
}

/// Error rate of an offline forest: every tree trained on its own full
/// reshuffle of `train`, evaluated on `test`.
pub fn offline_bf_error(
    train: &[DataPoint],
    test: &[DataPoint],
    config: ForestConfig,
) -> Result<f64, EvalError> {
    let forest = BoundaryForest::offline(config, train)?;
    error_rate(&forest, test)
}
