//! Shared fixtures for the criterion benches.

use topdeg_core::{generate, BipartiteGraph, TailDistribution, TailKind};

/// Directed benchmark graph: pure power tail (gamma 0.5, floor 5), 10%
/// dead IDs.
pub fn bench_graph(n: u32, seed: u64) -> BipartiteGraph {
    let dist = TailDistribution::new(TailKind::ParetoPure, 0.5, 5.0).expect("valid tail");
    generate(n, n, &dist, 0.1, seed).expect("valid graph")
}
