//! Quick detection of the highest in-degree entities in large directed
//! and bipartite graphs under a metered request budget.
//!
//! The crate models a platform where popularity must be discovered
//! through a rate-limited API rather than read off the full graph:
//!
//! * [`graph`] builds synthetic graphs whose in-degrees follow a
//!   regularly-varying tail (and loads real edge lists);
//! * [`oracle`] meters every observation with a request [`BudgetLedger`];
//! * [`algorithms`] holds the two-stage sampling strategy and the
//!   crawling/walking baselines it is compared against;
//! * [`metrics`] scores returned lists against ground truth;
//! * [`predictors`] computes closed-form performance predictions and
//!   budget-planning bounds;
//! * [`experiment`] wires it all into seeded, reproducible studies.

pub mod algorithms;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod metrics;
pub mod oracle;
pub mod predictors;

pub use algorithms::{
    crawl_ai, crawl_gai, highest_degree, random_walk, two_stage, RankedEntry, RankedResult,
    ScoreTable,
};
pub use error::{Error, Result};
pub use experiment::{
    derive_seed, predict_overlay, run, scaling_study, AlgorithmSpec, ExperimentSpec,
    ExperimentTable, GraphSource, OverlayRow, RunRow, ScalingPoint, ScalingStudy, SplitPolicy,
    SummaryRow,
};
pub use graph::{
    from_edges, generate, generate_from_degrees, ground_truth, load_edge_list, save_edge_list,
    BipartiteGraph, GroundTruth, TailDistribution, TailKind,
};
pub use metrics::{aggregate, first_error, fraction_correct, score, Aggregate, DetectionScore};
pub use oracle::{
    ApiOracle, BudgetLedger, GraphTouches, NeighborPage, OracleConfig, RequestKind, WalkCost,
    DEFAULT_PAGE_CAP,
};
pub use predictors::{
    complexity_scale, evt_predict, evt_quantile, expected_first_error, expected_fraction, hill,
    min_n1_bound, normal_approx_pk, optimal_n2, poisson_predict, tail_fit, PredictionBasis,
    PredictionVector, TailFit,
};
