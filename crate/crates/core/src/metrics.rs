//! Detection quality measures. Both measures compare a returned ID list
//! against ground truth through degree thresholds, so entities tied with
//! the k-th highest degree count as correct detections: any of them is as
//! good a "top-k entity" as the ones the truth ranking happened to list
//! first.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::graph::GroundTruth;

/// Fraction of the top `k` correctly identified: how many returned IDs
/// have true in-degree at least the k-th order statistic, capped at `k`,
/// divided by `k`.
pub fn fraction_correct(returned: &[u32], truth: &GroundTruth, k: usize) -> Result<f64> {
    check_coverage(truth, k)?;
    let threshold = truth.stat(k);
    let hits = distinct_degrees(returned, truth)
        .filter(|&d| d >= threshold)
        .count();
    Ok(hits.min(k) as f64 / k as f64)
}

/// Smallest rank `i <= n2` at which the returned list no longer contains
/// `i` entities of degree at least the i-th order statistic; `n2 + 1`
/// when every rank up to `n2` is satisfied.
pub fn first_error(returned: &[u32], truth: &GroundTruth, n2: usize) -> Result<usize> {
    check_coverage(truth, n2)?;
    let mut degrees: Vec<u32> = distinct_degrees(returned, truth).collect();
    degrees.sort_unstable_by(|a, b| b.cmp(a));
    for i in 1..=n2 {
        let threshold = truth.stat(i);
        // degrees is sorted descending: the prefix >= threshold is the
        // count of qualifying entities.
        let count = degrees.partition_point(|&d| d >= threshold);
        if count < i {
            return Ok(i);
        }
    }
    Ok(n2 + 1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionScore {
    pub fraction_topk: f64,
    pub first_error: usize,
}

pub fn score(returned: &[u32], truth: &GroundTruth, k: usize, n2: usize) -> Result<DetectionScore> {
    Ok(DetectionScore {
        fraction_topk: fraction_correct(returned, truth, k)?,
        first_error: first_error(returned, truth, n2)?,
    })
}

/// Mean and sample standard deviation (n - 1 denominator; zero for a
/// single observation).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    pub mean: f64,
    pub sd: f64,
    pub count: usize,
}

pub fn aggregate(values: &[f64]) -> Result<Aggregate> {
    if values.is_empty() {
        return Err(Error::InvalidParameter(
            "cannot aggregate zero observations".into(),
        ));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = if values.len() == 1 {
        0.0
    } else {
        let ss = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
        (ss / (n - 1.0)).sqrt()
    };
    Ok(Aggregate {
        mean,
        sd,
        count: values.len(),
    })
}

/// The thresholds only make sense when `truth` contains every entity that
/// could clear them: either it spans the whole population, or its last
/// entry already fell strictly below the `rank`-th order statistic (so no
/// omitted entity can tie with it).
fn check_coverage(truth: &GroundTruth, rank: usize) -> Result<()> {
    if rank == 0 {
        return Err(Error::InvalidParameter("rank must be at least 1".into()));
    }
    if rank > truth.len() {
        return Err(Error::InvalidParameter(format!(
            "rank {rank} exceeds the {} ranked entities in the ground truth",
            truth.len()
        )));
    }
    if !truth.is_full() && truth.stat(truth.len()) >= truth.stat(rank) {
        return Err(Error::InvalidParameter(format!(
            "ground truth may be missing entities tied at degree {}: extend it below that degree or rank the whole population",
            truth.stat(rank)
        )));
    }
    Ok(())
}

/// True degrees of the distinct returned IDs; IDs outside the truth
/// ranking are below every threshold the coverage check admits, reported
/// here as degree zero.
fn distinct_degrees<'a>(
    returned: &'a [u32],
    truth: &'a GroundTruth,
) -> impl Iterator<Item = u32> + 'a {
    let mut seen = HashSet::with_capacity(returned.len());
    returned.iter().filter_map(move |&id| {
        if seen.insert(id) {
            Some(truth.degree_of(id).unwrap_or(0))
        } else {
            None
        }
    })
}
