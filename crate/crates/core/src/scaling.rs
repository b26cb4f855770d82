//! Synthetic data sources, the equidistant random-tree growth model, scaling
//! measurements on live forests, and least-squares curve fitting with
//! model selection.
//!
//! The growth model ([`artificial_tree_sim`]) reproduces tree growth in the
//! regime where all pairwise distances are effectively equal, which is where
//! query cost is largest; its per-insertion comparison count follows
//! `~1.02 sqrt(2N)` for an unbounded child cap and bends onto a logarithmic
//! curve once a finite cap saturates (around `N = k^2/2`).
//! [`measure_scaling`] produces the matching curve for a real forest by
//! replaying a fixed held-out query batch at geometric checkpoints, and
//! [`fit_and_select`] decides which growth family a curve follows.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::data::{DataPoint, LabelVector, Position};
use crate::forest::{BoundaryForest, ForestConfig, ForestError, TaskMode};
use crate::metric::PositionMetric;
use crate::seed;
use crate::tree::ChildCap;

#[derive(Debug, Error, PartialEq)]
pub enum ScalingError {
    #[error("invalid mixture: {0}")]
    BadMixture(&'static str),
    #[error("dimension must be at least 1")]
    BadDimension,
    #[error("need at least one sample")]
    EmptyRun,
    #[error("checkpoints must be non-empty, strictly increasing, and reachable")]
    BadCheckpoints,
    #[error("query batch must be non-empty")]
    NoQueries,
    #[error("curve needs at least {needed} points, got {got}")]
    CurveTooShort { needed: usize, got: usize },
    #[error("{family} fit needs positive values")]
    NonPositiveValue { family: &'static str },
    #[error("fit is degenerate: {0}")]
    DegenerateFit(&'static str),
    #[error(transparent)]
    Forest(#[from] ForestError),
}

/// One Gaussian in a mixture: mean, row-major covariance, and mixing weight.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureComponent {
    pub mean: Vec<f64>,
    /// Symmetric positive semi-definite, `mean.len()` rows of the same width.
    pub covariance: Vec<Vec<f64>>,
    pub weight: f64,
}

impl MixtureComponent {
    /// Isotropic Gaussian with variance `sigma^2` in every coordinate.
    pub fn isotropic(mean: Vec<f64>, sigma: f64, weight: f64) -> Self {
        let dim = mean.len();
        let covariance = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { sigma * sigma } else { 0.0 }).collect())
            .collect();
        Self { mean, covariance, weight }
    }
}

/// A reproducible stream of positions.
#[derive(Debug, Clone, PartialEq)]
pub enum SyntheticSource {
    /// Uniform over the unit hypercube `[0, 1]^dim`.
    Hypercube { dim: usize, seed: u64 },
    /// Weighted Gaussian mixture; weights must sum to 1.
    GaussianMixture { components: Vec<MixtureComponent>, seed: u64 },
}

impl SyntheticSource {
    pub fn dim(&self) -> usize {
        match self {
            Self::Hypercube { dim, .. } => *dim,
            Self::GaussianMixture { components, .. } => {
                components.first().map_or(0, |c| c.mean.len())
            }
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            Self::Hypercube { seed, .. } | Self::GaussianMixture { seed, .. } => *seed,
        }
    }

    /// The same source re-keyed to a different stream.
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut source = self.clone();
        match &mut source {
            Self::Hypercube { seed: s, .. } | Self::GaussianMixture { seed: s, .. } => *s = seed,
        }
        source
    }

    pub fn validate(&self) -> Result<(), ScalingError> {
        match self {
            Self::Hypercube { dim, .. } => {
                if *dim == 0 {
                    return Err(ScalingError::BadDimension);
                }
            }
            Self::GaussianMixture { components, .. } => {
                let dim = self.dim();
                if components.is_empty() || dim == 0 {
                    return Err(ScalingError::BadMixture("no components"));
                }
                let mut total = 0.0;
                for c in components {
                    if c.mean.len() != dim || c.mean.iter().any(|m| !m.is_finite()) {
                        return Err(ScalingError::BadMixture("inconsistent mean"));
                    }
                    if c.covariance.len() != dim
                        || c.covariance.iter().any(|row| row.len() != dim)
                    {
                        return Err(ScalingError::BadMixture("covariance is not dim x dim"));
                    }
                    for i in 0..dim {
                        for j in 0..dim {
                            let v = c.covariance[i][j];
                            if !v.is_finite() || (v - c.covariance[j][i]).abs() > 1e-9 {
                                return Err(ScalingError::BadMixture(
                                    "covariance is not symmetric",
                                ));
                            }
                        }
                    }
                    cholesky(&c.covariance, dim)?;
                    if !(c.weight.is_finite() && c.weight > 0.0) {
                        return Err(ScalingError::BadMixture("weights must be positive"));
                    }
                    total += c.weight;
                }
                if (total - 1.0).abs() > 1e-9 {
                    return Err(ScalingError::BadMixture("weights must sum to 1"));
                }
            }
        }
        Ok(())
    }

    /// An infinite sampler over this source's stream.
    pub fn sampler(&self) -> Result<SourceSampler, ScalingError> {
        self.validate()?;
        let rng = ChaCha8Rng::seed_from_u64(self.seed());
        let kind = match self {
            Self::Hypercube { dim, .. } => SamplerKind::Cube { dim: *dim },
            Self::GaussianMixture { components, .. } => {
                let dim = self.dim();
                let factors = components
                    .iter()
                    .map(|c| Ok((c.mean.clone(), cholesky(&c.covariance, dim)?)))
                    .collect::<Result<_, ScalingError>>()?;
                let mut cumulative = Vec::with_capacity(components.len());
                let mut acc = 0.0;
                for c in components {
                    acc += c.weight;
                    cumulative.push(acc);
                }
                SamplerKind::Mixture { dim, factors, cumulative }
            }
        };
        Ok(SourceSampler { rng, kind })
    }

    /// The first `n` positions of the stream.
    pub fn generate(&self, n: usize) -> Result<Vec<Position>, ScalingError> {
        if n == 0 {
            return Err(ScalingError::EmptyRun);
        }
        Ok(self.sampler()?.take(n).collect())
    }
}

/// Lower-triangular Cholesky factor, row-major, tolerating semi-definite
/// input (zero pivots are kept at zero).
fn cholesky(cov: &[Vec<f64>], dim: usize) -> Result<Vec<f64>, ScalingError> {
    let mut l = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..=i {
            let mut sum = cov[i][j];
            for k in 0..j {
                sum -= l[i * dim + k] * l[j * dim + k];
            }
            if i == j {
                if sum < -1e-9 {
                    return Err(ScalingError::BadMixture(
                        "covariance is not positive semi-definite",
                    ));
                }
                l[i * dim + i] = sum.max(0.0).sqrt();
            } else if l[j * dim + j] > 0.0 {
                l[i * dim + j] = sum / l[j * dim + j];
            } else if sum.abs() > 1e-9 {
                return Err(ScalingError::BadMixture(
                    "covariance is not positive semi-definite",
                ));
            }
        }
    }
    Ok(l)
}

#[derive(Debug, Clone)]
enum SamplerKind {
    Cube { dim: usize },
    Mixture { dim: usize, factors: Vec<(Vec<f64>, Vec<f64>)>, cumulative: Vec<f64> },
}

/// Iterator over a validated source's position stream.
#[derive(Debug, Clone)]
pub struct SourceSampler {
    rng: ChaCha8Rng,
    kind: SamplerKind,
}

impl SourceSampler {
    pub fn next_position(&mut self) -> Position {
        let coords = match &self.kind {
            SamplerKind::Cube { dim } => {
                (0..*dim).map(|_| self.rng.random::<f64>()).collect::<Vec<f64>>()
            }
            SamplerKind::Mixture { dim, factors, cumulative } => {
                let u = self.rng.random::<f64>();
                let pick = cumulative.partition_point(|&c| c <= u).min(factors.len() - 1);
                let (mean, l) = &factors[pick];
                let z: Vec<f64> =
                    (0..*dim).map(|_| self.rng.sample(StandardNormal)).collect();
                (0..*dim)
                    .map(|i| {
                        mean[i]
                            + (0..=i).map(|k| l[i * dim + k] * z[k]).sum::<f64>()
                    })
                    .collect()
            }
        };
        Position::new(coords).expect("synthetic coordinates are finite")
    }
}

impl Iterator for SourceSampler {
    type Item = Position;

    fn next(&mut self) -> Option<Position> {
        Some(self.next_position())
    }
}

/// A cost curve: mean metric comparisons against tree size N, with strictly
/// increasing N.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingCurve {
    points: Vec<(u64, f64)>,
}

impl ScalingCurve {
    pub fn from_points(points: Vec<(u64, f64)>) -> Result<Self, ScalingError> {
        if points.is_empty() || points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(ScalingError::BadCheckpoints);
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(u64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn last(&self) -> (u64, f64) {
        *self.points.last().expect("curves are non-empty")
    }

    /// The sub-curve with N in `[min_n, max_n]`.
    pub fn restricted(&self, min_n: u64, max_n: u64) -> Result<ScalingCurve, ScalingError> {
        Self::from_points(
            self.points.iter().copied().filter(|&(n, _)| n >= min_n && n <= max_n).collect(),
        )
    }

    /// The later half of the curve (rounding the boundary down), where
    /// asymptotic behavior dominates.
    pub fn tail_half(&self) -> Result<ScalingCurve, ScalingError> {
        Self::from_points(self.points[self.points.len() / 2..].to_vec())
    }

    /// CSV with header `N,mean_comparisons`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,mean_comparisons\n");
        for &(n, y) in &self.points {
            let _ = writeln!(out, "{},{}", n, sig6(y));
        }
        out
    }
}

/// Pointwise mean of curves sharing one N grid.
pub fn average_curves(curves: &[ScalingCurve]) -> Result<ScalingCurve, ScalingError> {
    let first = curves.first().ok_or(ScalingError::BadCheckpoints)?;
    let grid: Vec<u64> = first.points().iter().map(|&(n, _)| n).collect();
    for curve in curves {
        let same: Vec<u64> = curve.points().iter().map(|&(n, _)| n).collect();
        if same != grid {
            return Err(ScalingError::BadCheckpoints);
        }
    }
    let points = grid
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let mean =
                curves.iter().map(|c| c.points()[i].1).sum::<f64>() / curves.len() as f64;
            (n, mean)
        })
        .collect();
    ScalingCurve::from_points(points)
}

/// Format with six significant digits, the project-wide float convention.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if exp >= 6 {
        format!("{x:.0}")
    } else {
        let precision = (5 - exp) as usize;
        format!("{x:.precision$}")
    }
}

/// Geometric checkpoint grid: about `per_decade` points per factor of 10,
/// from `min` to `max` inclusive, strictly increasing.
pub fn log_checkpoints(min: u64, max: u64, per_decade: usize) -> Vec<u64> {
    let min = min.max(1);
    if min >= max {
        return vec![max.max(1)];
    }
    let per_decade = per_decade.max(1);
    let lo = (min as f64).log10();
    let hi = (max as f64).log10();
    let steps = ((hi - lo) * per_decade as f64).ceil().max(1.0) as usize;
    let mut out = Vec::with_capacity(steps + 1);
    for s in 0..=steps {
        let n = 10f64.powf(lo + (hi - lo) * s as f64 / steps as f64).round() as u64;
        let n = n.clamp(min, max);
        if out.last() != Some(&n) {
            out.push(n);
        }
    }
    if out.last() != Some(&max) {
        out.push(max);
    }
    out
}

/// Result of one growth-model run.
#[derive(Debug, Clone, PartialEq)]
pub struct ArtificialTreeSim {
    /// Mean comparisons per insertion within each checkpoint window
    /// `(previous checkpoint, checkpoint]`.
    pub curve: ScalingCurve,
    /// Child-count histogram over the final tree.
    pub fanout: BTreeMap<usize, u64>,
    pub root_fanout: usize,
    /// Total nodes after `n` insertions, always `n + 1`.
    pub nodes: u64,
}

/// Grow a tree under the equidistant-data model: each insertion walks from
/// the root, and at a node with q children either stops (probability
/// 1/(q+1)) or descends to a uniformly random child; at a full node it
/// always descends. Comparisons are counted with the same convention as a
/// real tree: q per visited node, plus 1 when the node still has room.
/// `checkpoints` must be strictly increasing and end at `n`.
pub fn artificial_tree_sim(
    n: u64,
    cap: ChildCap,
    seed: u64,
    checkpoints: &[u64],
) -> Result<ArtificialTreeSim, ScalingError> {
    if n == 0 {
        return Err(ScalingError::EmptyRun);
    }
    if checkpoints.is_empty()
        || checkpoints.windows(2).any(|w| w[1] <= w[0])
        || checkpoints[0] == 0
        || *checkpoints.last().unwrap() != n
    {
        return Err(ScalingError::BadCheckpoints);
    }

    let mut children: Vec<Vec<u32>> = Vec::with_capacity(n as usize + 1);
    children.push(Vec::new());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut curve = Vec::with_capacity(checkpoints.len());
    let mut window_sum = 0u64;
    let mut window_len = 0u64;
    let mut next = 0usize;

    for t in 1..=n {
        let mut comparisons = 0u64;
        let mut v = 0usize;
        loop {
            let q = children[v].len();
            let room = cap.admits(q);
            comparisons += q as u64 + u64::from(room);
            if room {
                let draw = rng.random_range(0..=q);
                if draw == q {
                    break;
                }
                v = children[v][draw] as usize;
            } else {
                v = children[v][rng.random_range(0..q)] as usize;
            }
        }
        let id = children.len() as u32;
        children.push(Vec::new());
        children[v].push(id);

        window_sum += comparisons;
        window_len += 1;
        if t == checkpoints[next] {
            curve.push((t, window_sum as f64 / window_len as f64));
            window_sum = 0;
            window_len = 0;
            next += 1;
        }
    }

    let mut fanout = BTreeMap::new();
    for kids in &children {
        *fanout.entry(kids.len()).or_insert(0u64) += 1;
    }
    Ok(ArtificialTreeSim {
        curve: ScalingCurve::from_points(curve)?,
        fanout,
        root_fanout: children[0].len(),
        nodes: children.len() as u64,
    })
}

/// One forest scaling run: stream training data from `source`, and at each
/// checkpoint N measure mean comparisons per tree per query on a fixed
/// held-out batch.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRunConfig {
    pub trees: usize,
    pub cap: ChildCap,
    /// Forest master seed.
    pub seed: u64,
    pub source: SyntheticSource,
    /// Strictly increasing tree sizes; the first must be at least `trees`.
    pub checkpoints: Vec<u64>,
    /// Held-out query batch size, drawn from `source` on a separate stream.
    pub queries: usize,
}

/// Run the scaling protocol. The query batch is drawn once and replayed at
/// every checkpoint, so curve points share their query noise and the curve
/// shape stays clean; the batch never enters the forest.
pub fn measure_scaling(config: &ScalingRunConfig) -> Result<ScalingCurve, ScalingError> {
    if config.queries == 0 {
        return Err(ScalingError::NoQueries);
    }
    if config.checkpoints.is_empty()
        || config.checkpoints.windows(2).any(|w| w[1] <= w[0])
        || config.checkpoints[0] < config.trees as u64
    {
        return Err(ScalingError::BadCheckpoints);
    }

    let forest_config = ForestConfig {
        mode: TaskMode::Retrieval,
        trees: config.trees,
        cap: config.cap,
        metric: PositionMetric::Euclidean,
        seed: config.seed,
    };
    let mut forest = BoundaryForest::new(forest_config)?;
    let mut stream = config.source.sampler()?;
    let queries: Vec<Position> = config
        .source
        .with_seed(seed::split(config.source.seed(), seed::stream::QUERY))
        .sampler()?
        .take(config.queries)
        .collect();

    let mut trained = 0u64;
    let mut points = Vec::with_capacity(config.checkpoints.len());
    for &checkpoint in &config.checkpoints {
        while trained < checkpoint {
            let position = stream.next_position();
            let label = LabelVector::new(position.coords().to_vec())
                .expect("positions are valid labels");
            forest.train(DataPoint { position, label })?;
            trained += 1;
        }
        let per_query: Vec<u64> = queries
            .par_iter()
            .enumerate()
            .map(|(i, y)| Ok(forest.query_traced(y, i as u64)?.1.metric_comparisons))
            .collect::<Result<_, ForestError>>()?;
        let total: u64 = per_query.iter().sum();
        let mean = total as f64 / (config.queries as f64 * config.trees as f64);
        points.push((checkpoint, mean));
    }
    ScalingCurve::from_points(points)
}

/// Growth families for cost curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitFamily {
    /// `a * N^alpha`, coefficients `[a, alpha]`.
    Power,
    /// `a * ln N + b`, coefficients `[a, b]`.
    Logarithmic,
    /// `a * N^2 + b * N + c`, coefficients `[a, b, c]`.
    Quadratic,
    /// `a * (N ln N - N)`, coefficients `[a]`.
    Linearithmic,
}

impl fmt::Display for FitFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Power => "power",
            Self::Logarithmic => "logarithmic",
            Self::Quadratic => "quadratic",
            Self::Linearithmic => "linearithmic",
        })
    }
}

/// One family's least-squares fit and its residual over the full curve.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub family: FitFamily,
    pub coefficients: Vec<f64>,
    /// Root-mean-square residual over the whole curve; the coefficients were
    /// fit on the first half only, so this measures extrapolation.
    pub rms: f64,
}

impl FitReport {
    pub fn predict(&self, n: f64) -> f64 {
        let c = &self.coefficients;
        match self.family {
            FitFamily::Power => c[0] * n.powf(c[1]),
            FitFamily::Logarithmic => c[0] * n.ln() + c[1],
            FitFamily::Quadratic => c[0] * n * n + c[1] * n + c[2],
            FitFamily::Linearithmic => c[0] * (n * n.ln() - n),
        }
    }
}

/// Head-to-head comparison of two families on one curve.
#[derive(Debug, Clone, PartialEq)]
pub struct FitSelection {
    pub a: FitReport,
    pub b: FitReport,
    /// Declared only when one family's rms is at least 5x smaller.
    pub winner: Option<FitFamily>,
    /// Larger rms over smaller; 1 when both are zero.
    pub rms_ratio: f64,
}

impl FitSelection {
    /// key=value report block, one line per field.
    pub fn report_block(&self) -> String {
        let mut out = String::new();
        for (tag, report) in [("a", &self.a), ("b", &self.b)] {
            let _ = writeln!(out, "family_{tag}={}", report.family);
            let coeffs: Vec<String> =
                report.coefficients.iter().map(|&c| sig6(c)).collect();
            let _ = writeln!(out, "coefficients_{tag}={}", coeffs.join(","));
            let _ = writeln!(out, "rms_{tag}={}", sig6(report.rms));
        }
        let _ = writeln!(out, "rms_ratio={}", sig6(self.rms_ratio));
        let winner =
            self.winner.map_or_else(|| "inconclusive".to_string(), |w| w.to_string());
        let _ = writeln!(out, "winner={winner}");
        out
    }
}

/// Ordinary least squares for y = slope * x + intercept.
fn line_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64), ScalingError> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(ScalingError::DegenerateFit("x values are all equal"));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Solve a small dense linear system by Gaussian elimination.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>, ScalingError> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("system is non-empty");
        if a[pivot][col].abs() < 1e-12 {
            return Err(ScalingError::DegenerateFit("singular normal equations"));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    Ok((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn fit_family(family: FitFamily, pts: &[(f64, f64)]) -> Result<Vec<f64>, ScalingError> {
    match family {
        FitFamily::Power => {
            if pts.iter().any(|&(n, y)| n <= 0.0 || y <= 0.0) {
                return Err(ScalingError::NonPositiveValue { family: "power" });
            }
            let xs: Vec<f64> = pts.iter().map(|&(n, _)| n.ln()).collect();
            let ys: Vec<f64> = pts.iter().map(|&(_, y)| y.ln()).collect();
            let (alpha, log_a) = line_fit(&xs, &ys)?;
            Ok(vec![log_a.exp(), alpha])
        }
        FitFamily::Logarithmic => {
            if pts.iter().any(|&(n, _)| n <= 0.0) {
                return Err(ScalingError::NonPositiveValue { family: "logarithmic" });
            }
            let xs: Vec<f64> = pts.iter().map(|&(n, _)| n.ln()).collect();
            let ys: Vec<f64> = pts.iter().map(|&(_, y)| y).collect();
            let (a, b) = line_fit(&xs, &ys)?;
            Ok(vec![a, b])
        }
        FitFamily::Quadratic => {
            let mut normal = vec![vec![0.0; 3]; 3];
            let mut rhs = vec![0.0; 3];
            for &(n, y) in pts {
                let basis = [n * n, n, 1.0];
                for i in 0..3 {
                    for j in 0..3 {
                        normal[i][j] += basis[i] * basis[j];
                    }
                    rhs[i] += basis[i] * y;
                }
            }
            solve(normal, rhs)
        }
        FitFamily::Linearithmic => {
            if pts.iter().any(|&(n, _)| n <= 0.0) {
                return Err(ScalingError::NonPositiveValue { family: "linearithmic" });
            }
            let mut gg = 0.0;
            let mut gy = 0.0;
            for &(n, y) in pts {
                let g = n * n.ln() - n;
                gg += g * g;
                gy += g * y;
            }
            if gg == 0.0 {
                return Err(ScalingError::DegenerateFit("basis vanishes"));
            }
            Ok(vec![gy / gg])
        }
    }
}

fn rms_of(report: &FitReport, pts: &[(f64, f64)]) -> f64 {
    let sq: f64 = pts.iter().map(|&(n, y)| (report.predict(n) - y).powi(2)).sum();
    (sq / pts.len() as f64).sqrt()
}

/// Fit two families to the first half of `curve` (by point count, rounding
/// up) and score each by rms residual over the whole curve, so a family
/// wins by extrapolating, not interpolating. A winner is declared only when
/// its rms is at least 5x smaller; otherwise the verdict is inconclusive.
/// Needs at least 6 points.
pub fn fit_and_select(
    curve: &ScalingCurve,
    family_a: FitFamily,
    family_b: FitFamily,
) -> Result<FitSelection, ScalingError> {
    let pts: Vec<(f64, f64)> =
        curve.points().iter().map(|&(n, y)| (n as f64, y)).collect();
    if pts.len() < 6 {
        return Err(ScalingError::CurveTooShort { needed: 6, got: pts.len() });
    }
    let head = &pts[..pts.len().div_ceil(2)];

    let a = {
        let coefficients = fit_family(family_a, head)?;
        let mut report = FitReport { family: family_a, coefficients, rms: 0.0 };
        report.rms = rms_of(&report, &pts);
        report
    };
    let b = {
        let coefficients = fit_family(family_b, head)?;
        let mut report = FitReport { family: family_b, coefficients, rms: 0.0 };
        report.rms = rms_of(&report, &pts);
        report
    };

    // Residuals below a relative noise floor are numerically
    // indistinguishable from an exact fit; clamp before comparing so two
    // exact fits tie instead of dividing rounding error by zero.
    let scale: f64 = pts.iter().map(|&(_, y)| y.abs()).sum::<f64>() / pts.len() as f64;
    let floor = (1e-9 * scale).max(f64::MIN_POSITIVE);
    let (small, large) = if a.rms <= b.rms { (a.rms, b.rms) } else { (b.rms, a.rms) };
    let rms_ratio = large.max(floor) / small.max(floor);
    let winner = if rms_ratio >= 5.0 {
        Some(if a.rms <= b.rms { family_a } else { family_b })
    } else {
        None
    };
    Ok(FitSelection { a, b, winner, rms_ratio })
}

/// For each dimension, grow a single unbounded tree on hypercube data to
/// `n` points and fit a power law to the tail half of its query-cost curve,
/// returning `(dimension, exponent)` pairs. Checkpoints run from 64 to `n`
/// at 6 per decade; 128 held-out queries per checkpoint.
pub fn dimension_sweep(
    dims: &[usize],
    n: u64,
    seed: u64,
) -> Result<Vec<(usize, f64)>, ScalingError> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(ScalingError::BadDimension);
    }
    if n < 128 {
        return Err(ScalingError::EmptyRun);
    }
    dims.iter()
        .map(|&dim| {
            let config = ScalingRunConfig {
                trees: 1,
                cap: ChildCap::Unbounded,
                seed: seed::split(seed, dim as u64),
                source: SyntheticSource::Hypercube {
                    dim,
                    seed: seed::split(seed, 1_000_000 + dim as u64),
                },
                checkpoints: log_checkpoints(64, n, 6),
                queries: 128,
            };
            let curve = measure_scaling(&config)?;
            let tail: Vec<(f64, f64)> =
                curve.tail_half()?.points().iter().map(|&(n, y)| (n as f64, y)).collect();
            let coefficients = fit_family(FitFamily::Power, &tail)?;
            Ok((dim, coefficients[1]))
        })
        .collect()
}
