//! Shared helpers for the integration suites: an exhaustive reference
//! model of the two-stage candidate selection, and a Monte Carlo
//! counterpart driving the real implementation.

#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use topdeg_core::{derive_seed, two_stage, ApiOracle, BipartiteGraph, OracleConfig};

/// Probability that each candidate ID enters stage 2 given final hit
/// counts `scores`, under the selection rules: every ID scoring above the
/// admission boundary is taken, boundary ties are drawn uniformly, and
/// when fewer than `n2` IDs scored at all the remainder is drawn
/// uniformly from the unseen.
pub fn selection_probabilities(scores: &[u32], n2: usize) -> Vec<f64> {
    let m = scores.len();
    let positives: Vec<u32> = scores.iter().copied().filter(|&s| s > 0).collect();
    let p = positives.len();
    let mut probs = vec![0.0; m];
    if p >= n2 {
        let mut sorted = positives.clone();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        let boundary = sorted[n2 - 1];
        let above = sorted.iter().filter(|&&s| s > boundary).count();
        let ties = sorted.iter().filter(|&&s| s == boundary).count();
        let tie_prob = (n2 - above) as f64 / ties as f64;
        for (w, &s) in scores.iter().enumerate() {
            probs[w] = if s > boundary {
                1.0
            } else if s == boundary {
                tie_prob
            } else {
                0.0
            };
        }
    } else {
        let fill_prob = (n2 - p) as f64 / (m - p) as f64;
        for (w, &s) in scores.iter().enumerate() {
            probs[w] = if s > 0 { 1.0 } else { fill_prob };
        }
    }
    probs
}

/// Exact per-ID probability of entering stage 2, by enumerating every
/// possible stage-1 sample sequence (alive IDs, drawn with replacement)
/// and averaging the analytic selection probabilities.
pub fn enumerate_inclusion(graph: &BipartiteGraph, n1: usize, n2: usize) -> Vec<f64> {
    let alive: Vec<u32> = (0..graph.n_v()).filter(|&v| graph.is_alive(v)).collect();
    assert!(!alive.is_empty(), "enumeration needs alive entities");
    assert!(n2 <= graph.n_w() as usize);
    let m = graph.n_w() as usize;
    let outcomes = (alive.len() as u64).pow(n1 as u32);
    let weight = 1.0 / outcomes as f64;
    let mut totals = vec![0.0; m];
    let mut draw = vec![0usize; n1];
    let mut scores = vec![0u32; m];
    loop {
        scores.iter_mut().for_each(|s| *s = 0);
        for &slot in &draw {
            for &w in graph.out_neighbors(alive[slot]) {
                scores[w as usize] += 1;
            }
        }
        for (w, pr) in selection_probabilities(&scores, n2).into_iter().enumerate() {
            totals[w] += weight * pr;
        }
        // Odometer over the n1 sample slots.
        let mut pos = 0;
        loop {
            if pos == draw.len() {
                return totals;
            }
            draw[pos] += 1;
            if draw[pos] < alive.len() {
                break;
            }
            draw[pos] = 0;
            pos += 1;
        }
    }
}

/// Monte Carlo estimate of the same inclusion probabilities from real
/// two-stage runs with a budget covering the full plan.
pub fn mc_inclusion(
    graph: &BipartiteGraph,
    n1: u64,
    n2: usize,
    runs: u64,
    base_seed: u64,
) -> Vec<f64> {
    let mut counts = vec![0u64; graph.n_w() as usize];
    for r in 0..runs {
        let mut oracle = ApiOracle::new(
            graph,
            OracleConfig::new(n1 + n2 as u64),
            derive_seed(base_seed, &[r, 0]),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(base_seed, &[r, 1]));
        let result = two_stage(&mut oracle, n1, n2, &mut rng).expect("plan fits the budget");
        assert_eq!(result.entries.len(), n2, "every candidate must be verified");
        for e in &result.entries {
            counts[e.id as usize] += 1;
        }
    }
    counts.iter().map(|&c| c as f64 / runs as f64).collect()
}

/// Standard-error based tolerance for comparing an exact probability
/// against a Monte Carlo frequency.
pub fn mc_tolerance(p: f64, runs: u64, sigmas: f64) -> f64 {
    (p * (1.0 - p) / runs as f64).sqrt() * sigmas + 1e-9
}
