//! The train-eval pipeline: load LIBSVM files, stream the training file
//! through a forest in order, evaluate on the test file, and report.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use boundary_forest::eval::{retrieval_fraction_of, retrieval_ranks};
use boundary_forest::{
    seed, BoundaryForest, ChildCap, DataPoint, ForestConfig, LabelVector, Position,
    PositionMetric, Prediction, QueryStats, TaskMode,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dataset::{class_of, class_values, load_libsvm, Dataset};
use crate::report::{sig6, write_csv, Report};

/// Task selector as it appears on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeChoice {
    Classification,
    Regression,
    Retrieval,
}

impl ModeChoice {
    pub fn name(self) -> &'static str {
        match self {
            Self::Classification => "classification",
            Self::Regression => "regression",
            Self::Retrieval => "retrieval",
        }
    }

    fn task(self, epsilon: f64) -> TaskMode {
        match self {
            Self::Classification => TaskMode::Classification,
            Self::Regression => TaskMode::Regression { epsilon },
            Self::Retrieval => TaskMode::Retrieval,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainEvalConfig {
    pub mode: ModeChoice,
    pub trees: usize,
    pub cap: ChildCap,
    pub epsilon: f64,
    pub seed: u64,
    pub train: PathBuf,
    pub test: PathBuf,
    /// Optional per-query CSV destination.
    pub out: Option<PathBuf>,
    /// Shuffle the training rows before the pass (off = online file order).
    pub shuffle: bool,
    /// Per-feature min-max scaling fitted on the training file (off = raw
    /// features).
    pub minmax: bool,
}

/// Dense positions plus per-mode labels for one file.
fn assemble(
    dataset: &Dataset,
    dim: usize,
    mode: ModeChoice,
    classes: &[f64],
) -> Result<Vec<DataPoint>> {
    (0..dataset.len())
        .map(|row| {
            let coords = dataset.to_dense(row, dim);
            let label = match mode {
                ModeChoice::Classification => {
                    let value: f64 = dataset.rows[row].label.parse().with_context(|| {
                        format!("non-numeric class label {:?}", dataset.rows[row].label)
                    })?;
                    LabelVector::indicator(class_of(classes, value), classes.len())?
                }
                ModeChoice::Regression => {
                    let value: f64 = dataset.rows[row].label.parse().with_context(|| {
                        format!("non-numeric regression target {:?}", dataset.rows[row].label)
                    })?;
                    LabelVector::new(vec![value])?
                }
                ModeChoice::Retrieval => LabelVector::new(coords.clone())?,
            };
            Ok(DataPoint { position: Position::new(coords)?, label })
        })
        .collect()
}

/// Per-feature min-max ranges from the training points.
fn minmax_ranges(points: &[DataPoint], dim: usize) -> Vec<(f64, f64)> {
    let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); dim];
    for p in points {
        for (range, &c) in ranges.iter_mut().zip(p.position.coords()) {
            range.0 = range.0.min(c);
            range.1 = range.1.max(c);
        }
    }
    ranges
}

fn apply_minmax(points: &mut [DataPoint], ranges: &[(f64, f64)]) -> Result<()> {
    for p in points.iter_mut() {
        let coords: Vec<f64> = p
            .position
            .coords()
            .iter()
            .zip(ranges)
            .map(|(&c, &(lo, hi))| if hi > lo { (c - lo) / (hi - lo) } else { 0.0 })
            .collect();
        p.position = Position::new(coords)?;
    }
    Ok(())
}

/// A train/test pair loaded, densified, and labeled for one task mode.
pub struct LoadedPair {
    pub train: Vec<DataPoint>,
    pub test: Vec<DataPoint>,
    pub dim: usize,
    /// Distinct class count; 0 outside classification.
    pub classes: usize,
}

/// Load a LIBSVM train/test pair. The dimension is the largest feature
/// index seen in either file, and in classification mode the class map
/// covers both files.
pub fn load_pair(
    train_path: &std::path::Path,
    test_path: &std::path::Path,
    mode: ModeChoice,
) -> Result<LoadedPair> {
    let train_file = load_libsvm(train_path)?;
    let test_file = load_libsvm(test_path)?;
    if test_file.is_empty() {
        bail!("test file has no rows");
    }
    let dim = train_file.max_index.max(test_file.max_index) as usize;
    if dim == 0 {
        bail!("no features found in either file");
    }
    let classes = match mode {
        ModeChoice::Classification => class_values(&[&train_file, &test_file])?,
        _ => Vec::new(),
    };
    Ok(LoadedPair {
        train: assemble(&train_file, dim, mode, &classes)?,
        test: assemble(&test_file, dim, mode, &classes)?,
        dim,
        classes: classes.len(),
    })
}

pub fn run_train_eval(config: &TrainEvalConfig) -> Result<Report> {
    let pair = load_pair(&config.train, &config.test, config.mode)?;
    if pair.train.len() < config.trees {
        bail!(
            "training file has {} rows but the forest needs at least {} (one per tree)",
            pair.train.len(),
            config.trees
        );
    }
    let LoadedPair { mut train, mut test, dim, classes } = pair;
    if config.minmax {
        let ranges = minmax_ranges(&train, dim);
        apply_minmax(&mut train, &ranges)?;
        apply_minmax(&mut test, &ranges)?;
    }
    if config.shuffle {
        let stream = seed::tree_stream(config.seed, seed::stream::SHUFFLE, usize::MAX);
        train.shuffle(&mut ChaCha8Rng::seed_from_u64(stream));
    }

    let forest_config = ForestConfig {
        mode: config.mode.task(config.epsilon),
        trees: config.trees,
        cap: config.cap,
        metric: PositionMetric::Euclidean,
        seed: config.seed,
    };
    let mut forest = BoundaryForest::new(forest_config)?;

    let train_clock = Instant::now();
    let mut train_comparisons = 0u64;
    for point in &train {
        train_comparisons += forest.train(point.clone())?.stats.metric_comparisons;
    }
    let train_seconds = train_clock.elapsed().as_secs_f64();

    let eval_clock = Instant::now();
    let answers: Vec<(Prediction, QueryStats)> = test
        .par_iter()
        .enumerate()
        .map(|(i, p)| forest.query_traced(&p.position, i as u64))
        .collect::<Result<_, _>>()?;
    let eval_seconds = eval_clock.elapsed().as_secs_f64();
    let eval_comparisons: u64 = answers.iter().map(|(_, s)| s.metric_comparisons).sum();

    let mut report = Report::new();
    report.push("command", "train-eval");
    report.push("mode", config.mode.name());
    report.push_u64("trees", config.trees as u64);
    report.push("k", config.cap.to_string());
    report.push_f64("epsilon", config.epsilon);
    report.push_u64("seed", config.seed);
    report.push_u64("threads", rayon::current_num_threads() as u64);
    report.push("shuffle", if config.shuffle { "true" } else { "false" });
    report.push("minmax", if config.minmax { "true" } else { "false" });
    report.push_u64("dim", dim as u64);
    if config.mode == ModeChoice::Classification {
        report.push_u64("classes", classes as u64);
    }
    report.push_u64("train_rows", train.len() as u64);
    report.push_u64("test_rows", test.len() as u64);
    report.push_u64("stored_examples", forest.store().len() as u64);
    report.push_u64("train_comparisons", train_comparisons);
    report.push_u64("eval_comparisons", eval_comparisons);

    let mut csv: Option<(&str, Vec<Vec<String>>)> = None;
    match config.mode {
        ModeChoice::Classification => {
            let errors = test
                .iter()
                .zip(&answers)
                .filter(|(p, (prediction, _))| prediction.label.argmax() != p.label.argmax())
                .count();
            report.push_u64("errors", errors as u64);
            report.push_f64("error_rate_pct", 100.0 * errors as f64 / test.len() as f64);
            if config.out.is_some() {
                let rows = test
                    .iter()
                    .zip(&answers)
                    .enumerate()
                    .map(|(i, (p, (prediction, stats)))| {
                        vec![
                            i.to_string(),
                            prediction.label.argmax().to_string(),
                            p.label.argmax().to_string(),
                            sig6(prediction.nearest.distance),
                            stats.metric_comparisons.to_string(),
                        ]
                    })
                    .collect();
                csv = Some(("query,predicted,actual,nearest_distance,comparisons", rows));
            }
        }
        ModeChoice::Regression => {
            let sq: f64 = test
                .iter()
                .zip(&answers)
                .map(|(p, (prediction, _))| {
                    (prediction.label.values()[0] - p.label.values()[0]).powi(2)
                })
                .sum();
            report.push_f64("rmse", (sq / test.len() as f64).sqrt());
            if config.out.is_some() {
                let rows = test
                    .iter()
                    .zip(&answers)
                    .enumerate()
                    .map(|(i, (p, (prediction, stats)))| {
                        vec![
                            i.to_string(),
                            sig6(prediction.label.values()[0]),
                            sig6(p.label.values()[0]),
                            stats.metric_comparisons.to_string(),
                        ]
                    })
                    .collect();
                csv = Some(("query,predicted,actual,comparisons", rows));
            }
        }
        ModeChoice::Retrieval => {
            let queries: Vec<Position> = test.iter().map(|p| p.position.clone()).collect();
            let metric = forest.config().metric;
            let retrieve = |i: usize, _: &Position| Ok(answers[i].0.nearest.example);
            let f99 =
                retrieval_fraction_of(forest.store(), metric, &queries, 0.99, retrieve)?;
            let ranks = retrieval_ranks(forest.store(), metric, &queries, retrieve)?;
            let mean =
                ranks.iter().map(|r| r.fraction).sum::<f64>() / ranks.len() as f64;
            report.push_f64("f99", f99);
            report.push_f64("mean_fraction", mean);
            if config.out.is_some() {
                let rows = ranks
                    .iter()
                    .zip(&answers)
                    .map(|(rank, (prediction, stats))| {
                        vec![
                            rank.query.to_string(),
                            rank.example.to_string(),
                            rank.rank.to_string(),
                            sig6(rank.fraction),
                            sig6(prediction.nearest.distance),
                            stats.metric_comparisons.to_string(),
                        ]
                    })
                    .collect();
                csv = Some(("query,example,rank,fraction,distance,comparisons", rows));
            }
        }
    }

    if let (Some(path), Some((header, rows))) = (&config.out, csv) {
        write_csv(path, header, &rows)?;
        report.push("per_query_csv", path.display().to_string());
    }
    report.push_f64("train_seconds", train_seconds);
    report.push_f64("eval_seconds", eval_seconds);
    Ok(report)
}
