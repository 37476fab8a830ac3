//! `topdeg`: run budgeted top-k in-degree detection experiments from the
//! command line and write plot-ready CSV.

mod specfile;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use topdeg_core::experiment::overlay_csv;
use topdeg_core::{
    generate, predict_overlay, run, save_edge_list, scaling_study, AlgorithmSpec, ExperimentSpec,
    ExperimentTable, GraphSource, SplitPolicy, TailDistribution, TailKind, WalkCost,
};

#[derive(Parser)]
#[command(
    name = "topdeg",
    version,
    about = "Detect the highest in-degree entities under a metered request budget"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic graph and save it as an edge list.
    Generate(GenerateArgs),
    /// Run one strategy repeatedly; write per-run rows and a summary.
    Run(RunArgs),
    /// Sweep the two-stage candidate count n2 at a fixed budget.
    Sweep(SweepArgs),
    /// Run every strategy at one budget and tabulate the comparison.
    Compare(CompareArgs),
    /// Fit how the budget needed for a target accuracy grows with
    /// population size.
    Scaling(ScalingArgs),
    /// Overlay measured two-stage accuracy with model predictions.
    Predict(PredictArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    /// Pure power tail.
    Pareto,
    /// Power tail damped by a logarithmic factor.
    ParetoLog,
}

impl From<KindArg> for TailKind {
    fn from(kind: KindArg) -> TailKind {
        match kind {
            KindArg::Pareto => TailKind::ParetoPure,
            KindArg::ParetoLog => TailKind::ParetoLog,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
enum AlgorithmArg {
    TwoStage,
    RandomWalkStrict,
    RandomWalkRelaxed,
    CrawlGai,
    CrawlAi,
    HighestDegree,
}

/// Where the experiment graph comes from: an edge-list file, or the
/// generator parameters below.
#[derive(Args, Debug)]
struct GraphArgs {
    /// Edge-list file (whitespace `src dst` lines, optional
    /// `#bipartite N M seed` header).
    #[arg(long, value_name = "FILE", conflicts_with_all = [
        "n_v", "n_w", "kind", "gamma", "x_min", "dead_fraction", "graph_seed",
    ])]
    edge_list: Option<PathBuf>,
    /// Sampling-side size of the generated graph.
    #[arg(long, default_value_t = 10_000)]
    n_v: u32,
    /// Candidate-side size; defaults to --n-v (a directed graph).
    #[arg(long)]
    n_w: Option<u32>,
    /// In-degree tail family.
    #[arg(long, value_enum, default_value = "pareto")]
    kind: KindArg,
    /// Tail exponent of the generated in-degrees.
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    /// Scale floor of the in-degree distribution.
    #[arg(long, default_value_t = 1.0)]
    x_min: f64,
    /// Fraction of sampling-side IDs that are dead.
    #[arg(long, default_value_t = 0.0)]
    dead_fraction: f64,
    /// Generator seed.
    #[arg(long, default_value_t = 1)]
    graph_seed: u64,
}

impl GraphArgs {
    fn source(&self) -> GraphSource {
        match &self.edge_list {
            Some(path) => GraphSource::EdgeList { path: path.clone() },
            None => GraphSource::Synthetic {
                n_v: self.n_v,
                n_w: self.n_w.unwrap_or(self.n_v),
                kind: self.kind.into(),
                gamma: self.gamma,
                x_min: self.x_min,
                dead_fraction: self.dead_fraction,
                seed: self.graph_seed,
            },
        }
    }
}

/// Budget split of the two-stage strategy.
#[derive(Args, Debug)]
struct SplitArgs {
    /// Stage-1 sample count.
    #[arg(long, requires = "n2", conflicts_with = "optimal_gamma")]
    n1: Option<u64>,
    /// Stage-2 candidate count.
    #[arg(long, requires = "n1", conflicts_with = "optimal_gamma")]
    n2: Option<usize>,
    /// Derive the split from the budget, assuming this tail exponent.
    #[arg(long, value_name = "GAMMA")]
    optimal_gamma: Option<f64>,
}

impl SplitArgs {
    fn given(&self) -> bool {
        self.n1.is_some() || self.optimal_gamma.is_some()
    }

    fn policy(&self) -> Result<SplitPolicy> {
        match (self.n1, self.n2, self.optimal_gamma) {
            (Some(n1), Some(n2), None) => Ok(SplitPolicy::Explicit { n1, n2 }),
            (None, None, Some(gamma)) => Ok(SplitPolicy::Optimal { gamma }),
            (None, None, None) => {
                bail!("the two-stage strategy needs --n1/--n2 or --optimal-gamma")
            }
            _ => unreachable!("flag pairing enforced by the parser"),
        }
    }
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// Sampling-side size.
    #[arg(long, default_value_t = 10_000)]
    n_v: u32,
    /// Candidate-side size; defaults to --n-v.
    #[arg(long)]
    n_w: Option<u32>,
    /// In-degree tail family.
    #[arg(long, value_enum, default_value = "pareto")]
    kind: KindArg,
    /// Tail exponent.
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    /// Scale floor.
    #[arg(long, default_value_t = 1.0)]
    x_min: f64,
    /// Fraction of sampling-side IDs that are dead.
    #[arg(long, default_value_t = 0.0)]
    dead_fraction: f64,
    /// Generator seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output edge-list path.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Strategy to execute.
    #[arg(long, value_enum)]
    algorithm: AlgorithmArg,
    /// Request budget per repetition.
    #[arg(long)]
    budget: u64,
    #[command(flatten)]
    split: SplitArgs,
    /// Jump weight of the random-walk strategies.
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    /// Rank depth the output is scored against.
    #[arg(long, default_value_t = 100)]
    k: usize,
    /// Repetitions.
    #[arg(long, default_value_t = 30)]
    reps: u32,
    /// Base seed; repetitions derive independent streams from it.
    #[arg(long, default_value_t = 1)]
    base_seed: u64,
    /// Directory receiving rows.csv and summary.csv.
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Request budget per repetition.
    #[arg(long)]
    budget: u64,
    /// Candidate counts to try: `lo:hi:step` or a comma list.
    #[arg(long, value_name = "GRID")]
    n2_grid: String,
    /// Rank depth the output is scored against.
    #[arg(long, default_value_t = 100)]
    k: usize,
    /// Repetitions per grid point.
    #[arg(long, default_value_t = 100)]
    reps: u32,
    /// Base seed.
    #[arg(long, default_value_t = 1)]
    base_seed: u64,
    /// Directory receiving rows.csv and summary.csv.
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Request budget per repetition.
    #[arg(long)]
    budget: u64,
    #[command(flatten)]
    split: SplitArgs,
    /// Jump weight of the random-walk strategies.
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    /// Rank depth the output is scored against.
    #[arg(long, default_value_t = 100)]
    k: usize,
    /// Repetitions per strategy.
    #[arg(long, default_value_t = 30)]
    reps: u32,
    /// Base seed.
    #[arg(long, default_value_t = 1)]
    base_seed: u64,
    /// Directory receiving rows.csv and summary.csv.
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct ScalingArgs {
    /// Tail exponent of the per-size synthetic graphs.
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    /// Comma-separated population sizes (at least three).
    #[arg(long, value_name = "LIST")]
    sizes: String,
    /// Mean top-k fraction the budget search must reach.
    #[arg(long, default_value_t = 0.9)]
    target: f64,
    /// Rank depth.
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Repetitions per probed budget.
    #[arg(long, default_value_t = 30)]
    reps: u32,
    /// Base seed.
    #[arg(long, default_value_t = 1)]
    base_seed: u64,
    /// Directory receiving scaling.csv.
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Comma-separated rank depths to score.
    #[arg(long, value_name = "LIST", default_value = "100")]
    ks: String,
    /// Candidate counts to try: `lo:hi:step` or a comma list.
    #[arg(long, value_name = "GRID")]
    n2_grid: String,
    /// Request budget per repetition.
    #[arg(long)]
    budget: u64,
    /// Repetitions per grid point.
    #[arg(long, default_value_t = 100)]
    reps: u32,
    /// Pilot head size feeding the tail-fitted prediction.
    #[arg(long, default_value_t = 20)]
    m: usize,
    /// Base seed.
    #[arg(long, default_value_t = 1)]
    base_seed: u64,
    /// Directory receiving overlay.csv.
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
}

fn main() -> ExitCode {
    match execute(std::env::args().collect()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn execute(argv: Vec<String>) -> Result<ExitCode> {
    let argv = specfile::expand(argv)?;
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return Ok(ExitCode::SUCCESS);
        }
        Err(e) => {
            eprint!("{e}");
            return Ok(ExitCode::from(1));
        }
    };
    match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Scaling(args) => cmd_scaling(args),
        Command::Predict(args) => cmd_predict(args),
    }
}

fn cmd_generate(args: GenerateArgs) -> Result<ExitCode> {
    let dist = TailDistribution::new(args.kind.into(), args.gamma, args.x_min)?;
    let graph = generate(
        args.n_v,
        args.n_w.unwrap_or(args.n_v),
        &dist,
        args.dead_fraction,
        args.seed,
    )?;
    save_edge_list(&graph, &args.out)?;
    println!(
        "wrote {} ({} x {}, {} edges, {} alive)",
        args.out.display(),
        graph.n_v(),
        graph.n_w(),
        graph.edge_count(),
        graph.alive_count()
    );
    Ok(ExitCode::SUCCESS)
}

fn algorithm_spec(arg: AlgorithmArg, split: &SplitArgs, alpha: f64) -> Result<AlgorithmSpec> {
    if arg != AlgorithmArg::TwoStage && split.given() {
        bail!("--n1/--n2/--optimal-gamma only apply to the two-stage strategy");
    }
    Ok(match arg {
        AlgorithmArg::TwoStage => AlgorithmSpec::TwoStage {
            split: split.policy()?,
        },
        AlgorithmArg::RandomWalkStrict => AlgorithmSpec::RandomWalk {
            alpha,
            costing: WalkCost::Strict,
        },
        AlgorithmArg::RandomWalkRelaxed => AlgorithmSpec::RandomWalk {
            alpha,
            costing: WalkCost::Relaxed,
        },
        AlgorithmArg::CrawlGai => AlgorithmSpec::CrawlGai,
        AlgorithmArg::CrawlAi => AlgorithmSpec::CrawlAi,
        AlgorithmArg::HighestDegree => AlgorithmSpec::HighestDegree,
    })
}

fn cmd_run(args: RunArgs) -> Result<ExitCode> {
    let spec = ExperimentSpec {
        source: args.graph.source(),
        algorithms: vec![algorithm_spec(args.algorithm, &args.split, args.alpha)?],
        budgets: vec![args.budget],
        k: args.k,
        reps: args.reps,
        base_seed: args.base_seed,
    };
    let table = run(&spec)?;
    write_table(&table, &args.out_dir)
}

fn cmd_sweep(args: SweepArgs) -> Result<ExitCode> {
    let grid = parse_grid(&args.n2_grid)?;
    for &n2 in &grid {
        // Every grid point must leave at least one stage-1 request.
        if n2 < 1 || n2 as u64 >= args.budget {
            bail!(
                "candidate count {n2} outside [1, {}] for budget {}",
                args.budget - 1,
                args.budget
            );
        }
    }
    let algorithms = grid
        .iter()
        .map(|&n2| AlgorithmSpec::TwoStage {
            split: SplitPolicy::Explicit {
                n1: args.budget - n2 as u64,
                n2,
            },
        })
        .collect();
    let spec = ExperimentSpec {
        source: args.graph.source(),
        algorithms,
        budgets: vec![args.budget],
        k: args.k,
        reps: args.reps,
        base_seed: args.base_seed,
    };
    let table = run(&spec)?;
    write_table(&table, &args.out_dir)
}

fn cmd_compare(args: CompareArgs) -> Result<ExitCode> {
    let spec = ExperimentSpec {
        source: args.graph.source(),
        algorithms: vec![
            AlgorithmSpec::TwoStage {
                split: args.split.policy()?,
            },
            AlgorithmSpec::CrawlGai,
            AlgorithmSpec::CrawlAi,
            AlgorithmSpec::HighestDegree,
            AlgorithmSpec::RandomWalk {
                alpha: args.alpha,
                costing: WalkCost::Strict,
            },
            AlgorithmSpec::RandomWalk {
                alpha: args.alpha,
                costing: WalkCost::Relaxed,
            },
        ],
        budgets: vec![args.budget],
        k: args.k,
        reps: args.reps,
        base_seed: args.base_seed,
    };
    let table = run(&spec)?;
    write_table(&table, &args.out_dir)
}

fn cmd_scaling(args: ScalingArgs) -> Result<ExitCode> {
    let sizes = parse_list::<u64>(&args.sizes).context("parsing --sizes")?;
    let study = scaling_study(
        args.gamma,
        &sizes,
        args.target,
        args.k,
        args.reps,
        args.base_seed,
    )?;
    write_out(&args.out_dir, "scaling.csv", &study.csv())?;
    for p in &study.points {
        println!(
            "population {:>10}: budget {:>10}{}",
            p.population,
            p.budget,
            if p.converged { "" } else { "  (not converged)" }
        );
    }
    println!("budget growth exponent: {:.4}", study.exponent);
    let stragglers = study.points.iter().filter(|p| !p.converged).count();
    if stragglers > 0 {
        eprintln!("{stragglers} size(s) never reached the target accuracy");
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_predict(args: PredictArgs) -> Result<ExitCode> {
    let ks = parse_list::<usize>(&args.ks).context("parsing --ks")?;
    let grid = parse_grid(&args.n2_grid)?;
    let graph = args.graph.source().realize()?;
    let rows = predict_overlay(
        &graph,
        &ks,
        &grid,
        args.budget,
        args.reps,
        args.m,
        args.base_seed,
    )?;
    write_out(&args.out_dir, "overlay.csv", &overlay_csv(&rows))?;
    println!(
        "{:>5} {:>6} {:>10} {:>10} {:>10}",
        "k", "n2", "measured", "poisson", "tail-fit"
    );
    for r in &rows {
        println!(
            "{:>5} {:>6} {:>10.4} {:>10.4} {:>10.4}",
            r.k, r.n2, r.empirical_fraction, r.poisson_fraction, r.evt_fraction
        );
    }
    Ok(ExitCode::SUCCESS)
}

/// `lo:hi:step` range (inclusive ends) or a comma list.
fn parse_grid(text: &str) -> Result<Vec<usize>> {
    let text = text.trim();
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            bail!("grid ranges are `lo:hi:step`, got {text:?}");
        }
        let lo: usize = parts[0].trim().parse().context("grid lower bound")?;
        let hi: usize = parts[1].trim().parse().context("grid upper bound")?;
        let step: usize = parts[2].trim().parse().context("grid step")?;
        if step == 0 || lo > hi {
            bail!("grid range {text:?} is empty");
        }
        return Ok((lo..=hi).step_by(step).collect());
    }
    parse_list::<usize>(text)
}

fn parse_list<T: std::str::FromStr>(text: &str) -> Result<Vec<T>>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    let items: Result<Vec<T>> = text
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<T>()
                .with_context(|| format!("parsing list item {part:?}"))
        })
        .collect();
    let items = items?;
    if items.is_empty() {
        bail!("empty list");
    }
    Ok(items)
}

fn write_out(dir: &Path, name: &str, content: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, content).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

/// Persist a finished table and print its summary; partial failures keep
/// their rows but flip the exit code to 2.
fn write_table(table: &ExperimentTable, out_dir: &Path) -> Result<ExitCode> {
    write_out(out_dir, "rows.csv", &table.rows_csv())?;
    write_out(out_dir, "summary.csv", &table.summary_csv())?;
    println!(
        "{:<20} {:<24} {:>8} {:>4} {:>7} {:>9} {:>9} {:>12} {:>9}",
        "algorithm", "params", "budget", "ok", "failed", "fraction", "sd", "first_error", "sd"
    );
    for s in &table.summary {
        println!(
            "{:<20} {:<24} {:>8} {:>4} {:>7} {:>9.4} {:>9.4} {:>12.2} {:>9.2}",
            s.algorithm,
            s.params,
            s.budget,
            s.reps_ok,
            s.reps_failed,
            s.mean_fraction,
            s.sd_fraction,
            s.mean_first_error,
            s.sd_first_error
        );
    }
    let failed = table.rows.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        eprintln!("{failed} of {} runs failed; see rows.csv", table.rows.len());
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}
