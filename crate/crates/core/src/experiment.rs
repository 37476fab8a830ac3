//! Repeatable experiment plans: run a set of strategies over a budget
//! grid with independent repetitions, score every run against ground
//! truth, and emit deterministic CSV tables. Seeds are derived from one
//! base seed, so a fixed plan reproduces byte-identical output.

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::algorithms::{crawl_ai, crawl_gai, highest_degree, random_walk, two_stage, RankedResult};
use crate::error::{Error, Result};
use crate::graph::{generate, ground_truth, load_edge_list, BipartiteGraph, GroundTruth, TailDistribution, TailKind};
use crate::metrics::{aggregate, first_error, fraction_correct};
use crate::oracle::{ApiOracle, OracleConfig, WalkCost};
use crate::predictors::{
    evt_predict, expected_first_error, expected_fraction, optimal_n2, poisson_predict,
};

/// SplitMix64 step: the standard 64-bit finalizer-based generator, used
/// here to derive independent per-task seeds from one base seed.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Deterministic seed for a task addressed by `words`.
pub fn derive_seed(base: u64, words: &[u64]) -> u64 {
    let mut state = base;
    let mut out = splitmix64(&mut state);
    for &w in words {
        state ^= w.wrapping_mul(0x9e3779b97f4a7c15);
        out ^= splitmix64(&mut state);
    }
    out
}

/// Where the experiment graph comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    Synthetic {
        n_v: u32,
        n_w: u32,
        kind: TailKind,
        gamma: f64,
        x_min: f64,
        dead_fraction: f64,
        seed: u64,
    },
    EdgeList {
        path: PathBuf,
    },
}

impl GraphSource {
    pub fn realize(&self) -> Result<BipartiteGraph> {
        match self {
            GraphSource::Synthetic {
                n_v,
                n_w,
                kind,
                gamma,
                x_min,
                dead_fraction,
                seed,
            } => {
                let dist = TailDistribution::new(*kind, *gamma, *x_min)?;
                generate(*n_v, *n_w, &dist, *dead_fraction, *seed)
            }
            GraphSource::EdgeList { path } => load_edge_list(path),
        }
    }

    pub fn label(&self) -> String {
        match self {
            GraphSource::Synthetic {
                n_v,
                n_w,
                kind,
                gamma,
                x_min,
                dead_fraction,
                seed,
            } => {
                let kind = match kind {
                    TailKind::ParetoPure => "pareto",
                    TailKind::ParetoLog => "pareto-log",
                };
                format!(
                    "synthetic({kind},n_v={n_v},n_w={n_w},gamma={gamma},x_min={x_min},dead={dead_fraction},seed={seed})"
                )
            }
            GraphSource::EdgeList { path } => format!("edge-list({})", path.display()),
        }
    }
}

/// How a two-stage run divides its budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitPolicy {
    Explicit { n1: u64, n2: usize },
    /// Derive `n2` from the budget via [`optimal_n2`], spend the rest on
    /// stage 1.
    Optimal { gamma: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum AlgorithmSpec {
    TwoStage { split: SplitPolicy },
    RandomWalk { alpha: f64, costing: WalkCost },
    CrawlGai,
    CrawlAi,
    HighestDegree,
}

impl AlgorithmSpec {
    pub fn label(&self) -> &'static str {
        match self {
            AlgorithmSpec::TwoStage { .. } => "two-stage",
            AlgorithmSpec::RandomWalk {
                costing: WalkCost::Strict,
                ..
            } => "random-walk-strict",
            AlgorithmSpec::RandomWalk {
                costing: WalkCost::Relaxed,
                ..
            } => "random-walk-relaxed",
            AlgorithmSpec::CrawlGai => "crawl-gai",
            AlgorithmSpec::CrawlAi => "crawl-ai",
            AlgorithmSpec::HighestDegree => "highest-degree",
        }
    }

    /// The rank depth this strategy's output is scored to.
    fn rank_bound(&self, budget: u64, k: usize) -> Result<usize> {
        match self {
            AlgorithmSpec::TwoStage { split } => Ok(split.resolve(budget, k)?.1),
            _ => Ok(k),
        }
    }

    fn execute(
        &self,
        oracle: &mut ApiOracle,
        budget: u64,
        k: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<RankedResult> {
        match self {
            AlgorithmSpec::TwoStage { split } => {
                let (n1, n2) = split.resolve(budget, k)?;
                two_stage(oracle, n1, n2, rng)
            }
            AlgorithmSpec::RandomWalk { alpha, costing } => {
                random_walk(oracle, budget, k, *alpha, *costing, rng)
            }
            AlgorithmSpec::CrawlGai => crawl_gai(oracle, budget, k, rng),
            AlgorithmSpec::CrawlAi => crawl_ai(oracle, budget, k, rng),
            AlgorithmSpec::HighestDegree => highest_degree(oracle, budget, k, rng),
        }
    }
}

impl SplitPolicy {
    pub fn resolve(&self, budget: u64, k: usize) -> Result<(u64, usize)> {
        match *self {
            SplitPolicy::Explicit { n1, n2 } => Ok((n1, n2)),
            SplitPolicy::Optimal { gamma } => {
                let n2 = optimal_n2(budget, k, gamma)?;
                Ok((budget - n2 as u64, n2))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub source: GraphSource,
    pub algorithms: Vec<AlgorithmSpec>,
    pub budgets: Vec<u64>,
    pub k: usize,
    pub reps: u32,
    pub base_seed: u64,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() {
            return Err(Error::SpecValidation("no algorithms listed".into()));
        }
        if self.budgets.is_empty() || self.budgets.iter().any(|&b| b == 0) {
            return Err(Error::SpecValidation(
                "budgets must be non-empty and positive".into(),
            ));
        }
        if self.k == 0 {
            return Err(Error::SpecValidation("k must be at least 1".into()));
        }
        if self.reps == 0 {
            return Err(Error::SpecValidation("reps must be at least 1".into()));
        }
        if let GraphSource::EdgeList { path } = &self.source {
            if !path.exists() {
                return Err(Error::SpecValidation(format!(
                    "edge list {} does not exist",
                    path.display()
                )));
            }
        }
        Ok(())
    }
}

/// One scored run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub algorithm: &'static str,
    pub params: String,
    pub budget: u64,
    pub rep: u32,
    pub fraction_topk: f64,
    pub first_error: usize,
    pub rank_bound: usize,
    pub spent: u64,
    pub partial: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub algorithm: &'static str,
    /// Parameter point of the aggregated rows (empty when every
    /// repetition failed before recording one).
    pub params: String,
    pub budget: u64,
    pub reps_ok: usize,
    pub reps_failed: usize,
    pub mean_fraction: f64,
    pub sd_fraction: f64,
    pub mean_first_error: f64,
    pub sd_first_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentTable {
    pub rows: Vec<RunRow>,
    pub summary: Vec<SummaryRow>,
}

impl ExperimentTable {
    pub fn rows_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "algorithm",
            "params",
            "budget",
            "rep",
            "fraction_topk",
            "first_error",
            "rank_bound",
            "spent",
            "partial",
            "error",
        ])
        .expect("in-memory write");
        for r in &self.rows {
            let (fraction, ferr) = if r.error.is_some() {
                (String::new(), String::new())
            } else {
                (format!("{:.6}", r.fraction_topk), r.first_error.to_string())
            };
            w.write_record([
                r.algorithm.to_string(),
                r.params.clone(),
                r.budget.to_string(),
                r.rep.to_string(),
                fraction,
                ferr,
                r.rank_bound.to_string(),
                r.spent.to_string(),
                r.partial.to_string(),
                r.error.clone().unwrap_or_default(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8 rows")
    }

    pub fn summary_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "algorithm",
            "params",
            "budget",
            "reps_ok",
            "reps_failed",
            "mean_fraction",
            "sd_fraction",
            "mean_first_error",
            "sd_first_error",
        ])
        .expect("in-memory write");
        for s in &self.summary {
            w.write_record([
                s.algorithm.to_string(),
                s.params.clone(),
                s.budget.to_string(),
                s.reps_ok.to_string(),
                s.reps_failed.to_string(),
                format!("{:.6}", s.mean_fraction),
                format!("{:.6}", s.sd_fraction),
                format!("{:.6}", s.mean_first_error),
                format!("{:.6}", s.sd_first_error),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8 summary")
    }
}

/// Execute the whole plan. Every (algorithm, budget, repetition) triple
/// runs with its own derived seeds; failures become error-flagged rows
/// instead of aborting the table.
pub fn run(spec: &ExperimentSpec) -> Result<ExperimentTable> {
    spec.validate()?;
    let graph = spec.source.realize()?;
    if spec.k > graph.n_w() as usize {
        return Err(Error::SpecValidation(format!(
            "k = {} exceeds the {}-entity candidate side",
            spec.k,
            graph.n_w()
        )));
    }
    let truth = ground_truth(&graph, graph.n_w() as usize)?;
    let mut tasks = Vec::new();
    for (ai, algorithm) in spec.algorithms.iter().enumerate() {
        for (bi, &budget) in spec.budgets.iter().enumerate() {
            for rep in 0..spec.reps {
                tasks.push((ai, bi, rep, algorithm, budget));
            }
        }
    }
    let rows: Vec<RunRow> = tasks
        .par_iter()
        .map(|&(ai, bi, rep, algorithm, budget)| {
            run_one(
                &graph,
                &truth,
                algorithm,
                budget,
                spec.k,
                rep,
                derive_seed(spec.base_seed, &[ai as u64, bi as u64, rep as u64, 0]),
                derive_seed(spec.base_seed, &[ai as u64, bi as u64, rep as u64, 1]),
            )
        })
        .collect();
    let mut summary = Vec::new();
    for (ai, algorithm) in spec.algorithms.iter().enumerate() {
        for (bi, &budget) in spec.budgets.iter().enumerate() {
            // Rows keep task order: slice out this (algorithm, budget) group.
            let base = (ai * spec.budgets.len() + bi) * spec.reps as usize;
            let group = &rows[base..base + spec.reps as usize];
            let ok: Vec<&RunRow> = group.iter().filter(|r| r.error.is_none()).collect();
            let reps_failed = group.len() - ok.len();
            let params = ok.first().map(|r| r.params.clone()).unwrap_or_default();
            if ok.is_empty() {
                summary.push(SummaryRow {
                    algorithm: algorithm.label(),
                    params,
                    budget,
                    reps_ok: 0,
                    reps_failed,
                    mean_fraction: f64::NAN,
                    sd_fraction: f64::NAN,
                    mean_first_error: f64::NAN,
                    sd_first_error: f64::NAN,
                });
                continue;
            }
            let fractions: Vec<f64> = ok.iter().map(|r| r.fraction_topk).collect();
            let ferrs: Vec<f64> = ok.iter().map(|r| r.first_error as f64).collect();
            let fa = aggregate(&fractions)?;
            let ea = aggregate(&ferrs)?;
            summary.push(SummaryRow {
                algorithm: algorithm.label(),
                params,
                budget,
                reps_ok: ok.len(),
                reps_failed,
                mean_fraction: fa.mean,
                sd_fraction: fa.sd,
                mean_first_error: ea.mean,
                sd_first_error: ea.sd,
            });
        }
    }
    Ok(ExperimentTable { rows, summary })
}

#[allow(clippy::too_many_arguments)]
fn run_one(
    graph: &BipartiteGraph,
    truth: &GroundTruth,
    algorithm: &AlgorithmSpec,
    budget: u64,
    k: usize,
    rep: u32,
    oracle_seed: u64,
    algo_seed: u64,
) -> RunRow {
    let mut oracle = ApiOracle::new(graph, OracleConfig::new(budget), oracle_seed);
    let mut rng = ChaCha8Rng::seed_from_u64(algo_seed);
    let outcome = algorithm
        .rank_bound(budget, k)
        .and_then(|rank_bound| {
            let result = algorithm.execute(&mut oracle, budget, k, &mut rng)?;
            Ok((rank_bound, result))
        })
        .and_then(|(rank_bound, result)| {
            let ids = result.ids();
            let fraction = fraction_correct(&ids, truth, k)?;
            let ferr = first_error(&ids, truth, rank_bound.min(truth.len()))?;
            Ok((rank_bound, result, fraction, ferr))
        });
    match outcome {
        Ok((rank_bound, result, fraction_topk, ferr)) => RunRow {
            algorithm: result.algorithm,
            params: result.params.clone(),
            budget,
            rep,
            fraction_topk,
            first_error: ferr,
            rank_bound,
            spent: result.spent,
            partial: result.partial,
            error: None,
        },
        Err(e) => RunRow {
            algorithm: algorithm.label(),
            params: String::new(),
            budget,
            rep,
            fraction_topk: f64::NAN,
            first_error: 0,
            rank_bound: 0,
            spent: oracle.spent(),
            partial: false,
            error: Some(e.to_string()),
        },
    }
}

/// Smallest budget (per population size) at which the two-stage strategy
/// reaches a target mean top-`k` fraction, and the log-log slope of that
/// budget against the population size.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingPoint {
    pub population: u64,
    pub budget: u64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingStudy {
    pub points: Vec<ScalingPoint>,
    /// Least-squares slope of ln(budget) on ln(population) over the
    /// converged points.
    pub exponent: f64,
    pub gamma: f64,
    pub k: usize,
    pub target: f64,
}

impl ScalingStudy {
    pub fn csv(&self) -> String {
        let mut out = String::from("population,budget,converged\n");
        for p in &self.points {
            out.push_str(&format!("{},{},{}\n", p.population, p.budget, p.converged));
        }
        out
    }
}

/// For each population size, bisect for the smallest budget whose mean
/// top-`k` fraction over `reps` fresh graphs reaches `target`, splitting
/// each budget by [`optimal_n2`]. Pure power tails with `x_min = 1`.
pub fn scaling_study(
    gamma: f64,
    sizes: &[u64],
    target: f64,
    k: usize,
    reps: u32,
    base_seed: u64,
) -> Result<ScalingStudy> {
    if sizes.len() < 3 {
        return Err(Error::SpecValidation(
            "a slope needs at least three population sizes".into(),
        ));
    }
    if !(0.0..1.0).contains(&target) || target <= 0.0 {
        return Err(Error::SpecValidation(format!(
            "target fraction must lie in (0, 1), got {target}"
        )));
    }
    if reps == 0 {
        return Err(Error::SpecValidation("reps must be at least 1".into()));
    }
    for &n in sizes {
        if n <= 2 * k as u64 + 1 {
            return Err(Error::SpecValidation(format!(
                "population {n} is too small for top-{k} detection"
            )));
        }
        if n > u32::MAX as u64 {
            return Err(Error::SpecValidation(format!("population {n} exceeds u32")));
        }
    }
    let dist = TailDistribution::new(TailKind::ParetoPure, gamma, 1.0)?;
    let mut points = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let mean_fraction_at = |budget: u64| -> Result<f64> {
            let fractions: Result<Vec<f64>> = (0..reps)
                .into_par_iter()
                .map(|rep| {
                    let graph_seed = derive_seed(base_seed, &[size, rep as u64, 0]);
                    let graph = generate(size as u32, size as u32, &dist, 0.0, graph_seed)?;
                    let truth = ground_truth(&graph, graph.n_w() as usize)?;
                    let mut oracle = ApiOracle::new(
                        &graph,
                        OracleConfig::new(budget),
                        derive_seed(base_seed, &[size, rep as u64, 1]),
                    );
                    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                        base_seed,
                        &[size, rep as u64, 2],
                    ));
                    let n2 = optimal_n2(budget, k, gamma)?;
                    let result = two_stage(&mut oracle, budget - n2 as u64, n2, &mut rng)?;
                    fraction_correct(&result.ids(), &truth, k)
                })
                .collect();
            let fractions = fractions?;
            Ok(fractions.iter().sum::<f64>() / fractions.len() as f64)
        };
        let mut lo = 2 * k as u64;
        let mut hi = size;
        let converged = mean_fraction_at(hi)? >= target;
        if converged {
            while lo < hi {
                let mid = lo + (hi - lo) / 2;
                if mean_fraction_at(mid)? >= target {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
        }
        points.push(ScalingPoint {
            population: size,
            budget: if converged { lo } else { size },
            converged,
        });
    }
    let fit: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.converged)
        .map(|p| ((p.population as f64).ln(), (p.budget as f64).ln()))
        .collect();
    if fit.len() < 3 {
        return Err(Error::SpecValidation(
            "fewer than three sizes converged; no slope to report".into(),
        ));
    }
    let n = fit.len() as f64;
    let mx = fit.iter().map(|p| p.0).sum::<f64>() / n;
    let my = fit.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = fit.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = fit.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(ScalingStudy {
        points,
        exponent: sxy / sxx,
        gamma,
        k,
        target,
    })
}

/// Empirical detection rates next to their closed-form predictions, per
/// (`k`, `n2`) grid point at a fixed total budget.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlayRow {
    pub k: usize,
    pub n2: usize,
    pub n1: u64,
    pub reps: u32,
    pub empirical_fraction: f64,
    pub empirical_sd: f64,
    pub poisson_fraction: f64,
    pub evt_fraction: f64,
    pub empirical_first_error: f64,
    pub poisson_first_error: f64,
    pub evt_first_error: f64,
}

pub fn overlay_csv(rows: &[OverlayRow]) -> String {
    let mut out = String::from(
        "k,n2,n1,reps,empirical_fraction,empirical_sd,poisson_fraction,evt_fraction,empirical_first_error,poisson_first_error,evt_first_error\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
            r.k,
            r.n2,
            r.n1,
            r.reps,
            r.empirical_fraction,
            r.empirical_sd,
            r.poisson_fraction,
            r.evt_fraction,
            r.empirical_first_error,
            r.poisson_first_error,
            r.evt_first_error,
        ));
    }
    out
}

/// Measure the two-stage strategy over an `n2` grid at a fixed budget and
/// put the Poisson predictions next to it: once from the true degree
/// order statistics and once from a tail fit over the top `m` degrees
/// measured by a pilot run. Sampling rates use the alive population.
pub fn predict_overlay(
    graph: &BipartiteGraph,
    ks: &[usize],
    n2_grid: &[usize],
    budget: u64,
    reps: u32,
    m: usize,
    base_seed: u64,
) -> Result<Vec<OverlayRow>> {
    if ks.is_empty() || n2_grid.is_empty() || reps == 0 {
        return Err(Error::SpecValidation(
            "overlay needs ranks, an n2 grid and at least one repetition".into(),
        ));
    }
    let min_n2 = *n2_grid.iter().min().expect("non-empty grid");
    let max_k = *ks.iter().max().expect("non-empty ranks");
    if max_k > min_n2 {
        return Err(Error::SpecValidation(format!(
            "rank {max_k} exceeds the smallest candidate count {min_n2}"
        )));
    }
    if m >= min_n2 {
        return Err(Error::SpecValidation(format!(
            "pilot head m = {m} must stay below the smallest n2 = {min_n2}"
        )));
    }
    for &n2 in n2_grid {
        if (n2 as u64) >= budget {
            return Err(Error::SpecValidation(format!(
                "candidate count {n2} leaves no stage-1 budget out of {budget}"
            )));
        }
    }
    let truth = ground_truth(graph, graph.n_w() as usize)?;
    let population = graph.alive_count() as u64;
    // Pilot: one ordinary run whose verified degrees seed the tail fit.
    let pilot_n2 = min_n2;
    let pilot = {
        let mut oracle = ApiOracle::new(
            graph,
            OracleConfig::new(budget),
            derive_seed(base_seed, &[0, 0, 0]),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(base_seed, &[0, 0, 1]));
        two_stage(&mut oracle, budget - pilot_n2 as u64, pilot_n2, &mut rng)?
    };
    let pilot_degrees: Vec<u32> = pilot.entries.iter().map(|e| e.degree).collect();
    if pilot_degrees.len() <= m {
        return Err(Error::SpecValidation(format!(
            "pilot returned {} degrees, not enough for a head of {m}",
            pilot_degrees.len()
        )));
    }
    let mut rows = Vec::new();
    for &n2 in n2_grid {
        let n1 = budget - n2 as u64;
        let per_rep: Result<Vec<(Vec<f64>, f64)>> = (0..reps)
            .into_par_iter()
            .map(|rep| {
                let mut oracle = ApiOracle::new(
                    graph,
                    OracleConfig::new(budget),
                    derive_seed(base_seed, &[1, n2 as u64, rep as u64]),
                );
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                    base_seed,
                    &[2, n2 as u64, rep as u64],
                ));
                let result = two_stage(&mut oracle, n1, n2, &mut rng)?;
                let ids = result.ids();
                let fractions: Result<Vec<f64>> = ks
                    .iter()
                    .map(|&k| fraction_correct(&ids, &truth, k))
                    .collect();
                let ferr = first_error(&ids, &truth, n2)? as f64;
                Ok((fractions?, ferr))
            })
            .collect();
        let per_rep = per_rep?;
        let poisson = poisson_predict(truth.order_stats(), n1, n2, population)?;
        let evt = evt_predict(&pilot_degrees, m, n1, n2, population)?;
        let ferrs: Vec<f64> = per_rep.iter().map(|(_, e)| *e).collect();
        let ferr_agg = aggregate(&ferrs)?;
        for (ki, &k) in ks.iter().enumerate() {
            let fractions: Vec<f64> = per_rep.iter().map(|(f, _)| f[ki]).collect();
            let fa = aggregate(&fractions)?;
            rows.push(OverlayRow {
                k,
                n2,
                n1,
                reps,
                empirical_fraction: fa.mean,
                empirical_sd: fa.sd,
                poisson_fraction: expected_fraction(&poisson, k)?,
                evt_fraction: expected_fraction(&evt, k)?,
                empirical_first_error: ferr_agg.mean,
                poisson_first_error: expected_first_error(&poisson),
                evt_first_error: expected_first_error(&evt),
            });
        }
    }
    Ok(rows)
}
