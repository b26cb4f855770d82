//! Benchmark drivers behind `bf bench ...`: the growth-model simulator, the
//! query-cost scaling protocol on synthetic data, the dimension sweep, and
//! the retrieval-quality curve.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use boundary_forest::scaling::average_curves;
use boundary_forest::{
    artificial_tree_sim, dimension_sweep, fit_and_select, log_checkpoints, measure_scaling,
    retrieval_fraction, seed, BoundaryForest, ChildCap, DataPoint, FitFamily, ForestConfig,
    LabelVector, MixtureComponent, Position, PositionMetric, ScalingCurve, ScalingRunConfig,
    SyntheticSource, TaskMode,
};

use crate::report::{sig6, write_csv, Report};

/// Synthetic data family for the scaling and retrieval benchmarks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistChoice {
    /// Uniform on the unit hypercube.
    Hypercube,
    /// Three isotropic unit-variance Gaussians with weights 1/2, 1/4, 1/4
    /// and mean 4(j+1) along axis j mod D for component j.
    Mixture,
}

impl DistChoice {
    pub fn name(self) -> &'static str {
        match self {
            Self::Hypercube => "hypercube",
            Self::Mixture => "mixture",
        }
    }

    pub fn source(self, dim: usize, seed: u64) -> Result<SyntheticSource> {
        let source = match self {
            Self::Hypercube => SyntheticSource::Hypercube { dim, seed },
            Self::Mixture => {
                let components = [0.5, 0.25, 0.25]
                    .iter()
                    .enumerate()
                    .map(|(j, &weight)| {
                        let mut mean = vec![0.0; dim];
                        mean[j % dim] = 4.0 * (j + 1) as f64;
                        MixtureComponent::isotropic(mean, 1.0, weight)
                    })
                    .collect();
                SyntheticSource::GaussianMixture { components, seed }
            }
        };
        source.validate()?;
        Ok(source)
    }
}

fn write_curve(out: Option<&Path>, curve: &ScalingCurve, report: &mut Report) -> Result<()> {
    if let Some(path) = out {
        fs::write(path, curve.to_csv())
            .with_context(|| format!("writing {}", path.display()))?;
        report.push("curve_csv", path.display().to_string());
    }
    Ok(())
}

/// Grow trees under the equidistant-data growth model, average the
/// comparison curves over `seeds` runs, and test square-root against
/// logarithmic growth.
pub fn run_artificial(
    n: u64,
    cap: ChildCap,
    seed: u64,
    seeds: usize,
    out: Option<PathBuf>,
) -> Result<Report> {
    if seeds == 0 {
        bail!("need at least one seed");
    }
    let grid = log_checkpoints(32.min(n), n, 8);
    let mut curves = Vec::with_capacity(seeds);
    let mut root_fanout_sum = 0u64;
    let mut nodes = 0u64;
    for i in 0..seeds {
        let sim = artificial_tree_sim(n, cap, seed::split(seed, i as u64), &grid)?;
        root_fanout_sum += sim.root_fanout as u64;
        nodes = sim.nodes;
        curves.push(sim.curve);
    }
    let curve = average_curves(&curves)?;

    let mut report = Report::new();
    report.push("command", "bench-artificial");
    report.push_u64("n", n);
    report.push("k", cap.to_string());
    report.push_u64("seed", seed);
    report.push_u64("seeds", seeds as u64);
    report.push_u64("nodes", nodes);
    report.push_f64("root_fanout_mean", root_fanout_sum as f64 / seeds as f64);
    report.push_f64("sqrt_2n", (2.0 * n as f64).sqrt());
    report.push_f64("tail_ratio", curve.last().1 / (2.0 * n as f64).sqrt());
    if curve.len() >= 6 {
        let fit = fit_and_select(&curve, FitFamily::Power, FitFamily::Logarithmic)?;
        report.push_block(&fit.report_block());
    }
    write_curve(out.as_deref(), &curve, &mut report)?;
    Ok(report)
}

/// Stream synthetic data into a forest and measure mean metric comparisons
/// per tree per query at logarithmic checkpoints.
#[allow(clippy::too_many_arguments)]
pub fn run_scaling(
    dist: DistChoice,
    dim: usize,
    trees: usize,
    cap: ChildCap,
    n: u64,
    queries: usize,
    seed: u64,
    out: Option<PathBuf>,
) -> Result<Report> {
    let source = dist.source(dim, seed::split(seed, 11))?;
    let config = ScalingRunConfig {
        trees,
        cap,
        seed,
        source,
        checkpoints: log_checkpoints((trees as u64).max(32), n, 8),
        queries,
    };
    let curve = measure_scaling(&config)?;

    let mut report = Report::new();
    report.push("command", "bench-scaling");
    report.push("dist", dist.name());
    report.push_u64("d", dim as u64);
    report.push_u64("trees", trees as u64);
    report.push("k", cap.to_string());
    report.push_u64("n", n);
    report.push_u64("queries", queries as u64);
    report.push_u64("seed", seed);
    report.push_f64("final_mean_comparisons", curve.last().1);

    // With a finite cap the curve crosses from square-root growth to
    // logarithmic once trees saturate near N = k^2/2. Fit from twice that
    // knee — the crossover itself bends away from both families — when
    // enough of the curve lies beyond it.
    let fit_curve = match cap {
        ChildCap::Finite(k) => {
            let knee = (k as u64).saturating_mul(k as u64);
            match curve.restricted(knee, n) {
                Ok(tail) if tail.len() >= 6 => {
                    report.push_u64("fit_from", tail.points()[0].0);
                    tail
                }
                _ => curve.clone(),
            }
        }
        ChildCap::Unbounded => curve.clone(),
    };
    if fit_curve.len() >= 6 {
        let fit = fit_and_select(&fit_curve, FitFamily::Power, FitFamily::Logarithmic)?;
        report.push_block(&fit.report_block());
    }
    write_curve(out.as_deref(), &curve, &mut report)?;
    Ok(report)
}

/// Fit the comparison-growth exponent of a single unbounded tree at each
/// dimension.
pub fn run_dimsweep(
    dims: &[usize],
    n: u64,
    seed: u64,
    out: Option<PathBuf>,
) -> Result<Report> {
    let alphas = dimension_sweep(dims, n, seed)?;
    let mut report = Report::new();
    report.push("command", "bench-dimsweep");
    report.push_u64("n", n);
    report.push_u64("seed", seed);
    for &(dim, alpha) in &alphas {
        report.push_f64(&format!("alpha_{dim}"), alpha);
    }
    if let Some(path) = &out {
        let rows: Vec<Vec<String>> = alphas
            .iter()
            .map(|&(dim, alpha)| vec![dim.to_string(), sig6(alpha)])
            .collect();
        write_csv(path, "D,alpha", &rows)?;
        report.push("curve_csv", path.display().to_string());
    }
    Ok(report)
}

/// Track the rank-fraction percentile of retrieved neighbors on a fixed
/// held-out query batch as the stored set grows.
#[allow(clippy::too_many_arguments)]
pub fn run_retrieval_f(
    dist: DistChoice,
    dim: usize,
    trees: usize,
    cap: ChildCap,
    n: u64,
    queries: usize,
    percentile: f64,
    seed: u64,
    out: Option<PathBuf>,
) -> Result<Report> {
    if queries == 0 {
        bail!("need at least one query");
    }
    let source = dist.source(dim, seed::split(seed, 21))?;
    let query_batch: Vec<Position> = source
        .with_seed(seed::split(source.seed(), seed::stream::QUERY))
        .sampler()?
        .take(queries)
        .collect();
    let checkpoints = log_checkpoints((trees as u64).max(100), n, 4);

    let mut forest = BoundaryForest::new(ForestConfig {
        mode: TaskMode::Retrieval,
        trees,
        cap,
        metric: PositionMetric::Euclidean,
        seed,
    })?;
    let mut stream = source.sampler()?;
    let mut fed = 0u64;
    let mut points = Vec::with_capacity(checkpoints.len());
    for &checkpoint in &checkpoints {
        while fed < checkpoint {
            let position = stream.next_position();
            let label = LabelVector::new(position.coords().to_vec())?;
            forest.train(DataPoint { position, label })?;
            fed += 1;
        }
        points.push((checkpoint, retrieval_fraction(&forest, &query_batch, percentile)?));
    }

    let mut report = Report::new();
    report.push("command", "bench-retrieval-f");
    report.push("dist", dist.name());
    report.push_u64("d", dim as u64);
    report.push_u64("trees", trees as u64);
    report.push("k", cap.to_string());
    report.push_u64("n", n);
    report.push_u64("queries", queries as u64);
    report.push_f64("percentile", percentile);
    report.push_u64("seed", seed);
    report.push_f64("final_f", points.last().unwrap().1);
    if let Some(path) = &out {
        let rows: Vec<Vec<String>> = points
            .iter()
            .map(|&(n, f)| vec![n.to_string(), sig6(f)])
            .collect();
        write_csv(path, "N,f", &rows)?;
        report.push("curve_csv", path.display().to_string());
    }
    Ok(report)
}
