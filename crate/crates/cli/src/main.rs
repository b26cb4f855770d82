//! `bf`: train and evaluate boundary forests on LIBSVM files, and run the
//! synthetic benchmarks. Reports go to stdout as `key=value` lines; optional
//! CSV artifacts go wherever `--out` points.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use bf_cli::bench::{self, DistChoice};
use bf_cli::run::{run_train_eval, ModeChoice, TrainEvalConfig};
use boundary_forest::ChildCap;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "bf", version, about = "Boundary forest trainer and benchmarks")]
struct Cli {
    /// Worker threads for parallel queries (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stream a LIBSVM training file into a forest, then evaluate on a test
    /// file.
    TrainEval(TrainEvalArgs),
    /// Synthetic benchmarks: growth model, scaling, dimension sweep,
    /// retrieval quality.
    #[command(subcommand)]
    Bench(BenchCommand),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Classification,
    Regression,
    Retrieval,
}

impl From<ModeArg> for ModeChoice {
    fn from(mode: ModeArg) -> Self {
        match mode {
            ModeArg::Classification => ModeChoice::Classification,
            ModeArg::Regression => ModeChoice::Regression,
            ModeArg::Retrieval => ModeChoice::Retrieval,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DistArg {
    Hypercube,
    Mixture,
}

impl From<DistArg> for DistChoice {
    fn from(dist: DistArg) -> Self {
        match dist {
            DistArg::Hypercube => DistChoice::Hypercube,
            DistArg::Mixture => DistChoice::Mixture,
        }
    }
}

#[derive(Args)]
struct TrainEvalArgs {
    /// Task: classification, regression, or retrieval.
    #[arg(long, value_enum)]
    mode: ModeArg,
    /// Number of trees in the forest.
    #[arg(long, default_value_t = 50)]
    nt: usize,
    /// Max children per node; an integer >= 2 or "inf".
    #[arg(long, default_value = "50", value_parser = parse_cap)]
    k: ChildCap,
    /// Regression threshold: a training point is stored only when the
    /// prediction misses its target by more than this.
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    /// Master seed; falls back to $BF_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Training file (LIBSVM sparse format), consumed in order.
    #[arg(long)]
    train: PathBuf,
    /// Test file (LIBSVM sparse format).
    #[arg(long)]
    test: PathBuf,
    /// Write a per-query CSV here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Shuffle training rows (seeded) instead of using file order.
    #[arg(long)]
    shuffle: bool,
    /// Min-max scale every feature to [0,1] using training-file ranges.
    #[arg(long)]
    minmax: bool,
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Grow trees under the equidistant-data model and fit the comparison
    /// curve.
    Artificial {
        /// Insertions per run. Accepts 1e6-style values and underscores.
        #[arg(long, default_value = "1000000", value_parser = parse_count)]
        n: u64,
        /// Max children per node; an integer >= 2 or "inf".
        #[arg(long, default_value = "inf", value_parser = parse_cap)]
        k: ChildCap,
        /// Master seed; falls back to $BF_SEED, then 0.
        #[arg(long)]
        seed: Option<u64>,
        /// Independent runs to average.
        #[arg(long, default_value_t = 1)]
        seeds: usize,
        /// Write the averaged N,mean_comparisons curve here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure query cost against training-set size on synthetic data.
    Scaling {
        #[arg(long, value_enum, default_value_t = DistArg::Hypercube)]
        dist: DistArg,
        /// Data dimension.
        #[arg(long, default_value_t = 100)]
        d: usize,
        /// Number of trees in the forest.
        #[arg(long, default_value_t = 1)]
        nt: usize,
        /// Max children per node; an integer >= 2 or "inf".
        #[arg(long, default_value = "inf", value_parser = parse_cap)]
        k: ChildCap,
        /// Training points to stream.
        #[arg(long, default_value = "100000", value_parser = parse_count)]
        n: u64,
        /// Held-out queries replayed at each checkpoint.
        #[arg(long, default_value_t = 128)]
        queries: usize,
        /// Master seed; falls back to $BF_SEED, then 0.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the N,mean_comparisons curve here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the query-cost growth exponent at several dimensions.
    Dimsweep {
        /// Comma-separated dimensions.
        #[arg(long, value_delimiter = ',', default_value = "5,20,100")]
        dims: Vec<usize>,
        /// Training points per dimension.
        #[arg(long, default_value = "100000", value_parser = parse_count)]
        n: u64,
        /// Master seed; falls back to $BF_SEED, then 0.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the D,alpha table here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Track retrieved-neighbor rank quality as the stored set grows.
    RetrievalF {
        #[arg(long, value_enum, default_value_t = DistArg::Hypercube)]
        dist: DistArg,
        /// Data dimension.
        #[arg(long, default_value_t = 100)]
        d: usize,
        /// Number of trees in the forest.
        #[arg(long, default_value_t = 50)]
        nt: usize,
        /// Max children per node; an integer >= 2 or "inf".
        #[arg(long, default_value = "50", value_parser = parse_cap)]
        k: ChildCap,
        /// Training points to stream.
        #[arg(long, default_value = "100000", value_parser = parse_count)]
        n: u64,
        /// Held-out queries evaluated at each checkpoint.
        #[arg(long, default_value_t = 256)]
        queries: usize,
        /// Rank-fraction percentile to report (0, 1].
        #[arg(long, default_value_t = 0.99)]
        percentile: f64,
        /// Master seed; falls back to $BF_SEED, then 0.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the N,f curve here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parse a count that may be written as an integer (underscores allowed) or
/// as an integral float like 1e6.
fn parse_count(s: &str) -> Result<u64, String> {
    let compact: String = s.chars().filter(|&c| c != '_').collect();
    if let Ok(n) = compact.parse::<u64>() {
        return Ok(n);
    }
    let x: f64 = compact
        .parse()
        .map_err(|_| format!("expected a count, got {s:?}"))?;
    if !x.is_finite() || x < 0.0 || x.fract() != 0.0 || x > 2f64.powi(53) {
        return Err(format!("expected a whole number, got {s:?}"));
    }
    Ok(x as u64)
}

fn parse_cap(s: &str) -> Result<ChildCap, String> {
    s.parse()
}

/// --seed wins, then $BF_SEED, then 0.
fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var("BF_SEED") {
        Ok(value) => value
            .parse()
            .with_context(|| format!("BF_SEED must be an unsigned integer, got {value:?}")),
        Err(_) => Ok(0),
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let report = match cli.command {
        Command::TrainEval(args) => run_train_eval(&TrainEvalConfig {
            mode: args.mode.into(),
            trees: args.nt,
            cap: args.k,
            epsilon: args.epsilon,
            seed: resolve_seed(args.seed)?,
            train: args.train,
            test: args.test,
            out: args.out,
            shuffle: args.shuffle,
            minmax: args.minmax,
        })?,
        Command::Bench(BenchCommand::Artificial { n, k, seed, seeds, out }) => {
            bench::run_artificial(n, k, resolve_seed(seed)?, seeds, out)?
        }
        Command::Bench(BenchCommand::Scaling { dist, d, nt, k, n, queries, seed, out }) => {
            bench::run_scaling(dist.into(), d, nt, k, n, queries, resolve_seed(seed)?, out)?
        }
        Command::Bench(BenchCommand::Dimsweep { dims, n, seed, out }) => {
            bench::run_dimsweep(&dims, n, resolve_seed(seed)?, out)?
        }
        Command::Bench(BenchCommand::RetrievalF {
            dist,
            d,
            nt,
            k,
            n,
            queries,
            percentile,
            seed,
            out,
        }) => bench::run_retrieval_f(
            dist.into(),
            d,
            nt,
            k,
            n,
            queries,
            percentile,
            resolve_seed(seed)?,
            out,
        )?,
    };
    print!("{}", report.render());
    Ok(())
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
