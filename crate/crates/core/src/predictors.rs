//! Closed-form performance prediction for the two-stage strategy.
//!
//! During stage 1 the hit count of an entity with in-degree `F` among
//! `n1` uniform samples is approximately Poisson with rate
//! `lambda = n1 * F / N`. An entity survives into stage 2 when its hit
//! count beats the admission boundary — approximated by the hit count of
//! the entity ranked `n2` — and was seen at all. Treating the two counts
//! as independent Poisson variables gives the per-rank detection
//! probabilities computed here, either from true degree order statistics
//! or from a tail fit extrapolated out of a small pilot sample.

use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::error::{Error, Result};

/// Where a prediction's degree quantiles came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictionBasis {
    /// True order statistics of the degree sequence.
    TrueQuantiles,
    /// Top-`m` pilot measurements extended by a fitted power tail.
    TailSpliced { m: usize },
}

impl PredictionBasis {
    pub fn label(self) -> String {
        match self {
            PredictionBasis::TrueQuantiles => "true-degrees".into(),
            PredictionBasis::TailSpliced { m } => format!("tail-spliced-m{m}"),
        }
    }
}

/// Per-rank detection probabilities for one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionVector {
    /// `p_hat[j - 1]` estimates the probability that the entity of rank
    /// `j` is returned by a two-stage run.
    pub p_hat: Vec<f64>,
    pub basis: PredictionBasis,
    pub n1: u64,
    pub n2: usize,
    /// Population size the sampling rates are relative to (the alive
    /// count when dead entities are skipped for free).
    pub population: u64,
}

/// P(X > t) for X ~ Poisson(lambda), via the regularized lower incomplete
/// gamma function (stable for any rate).
pub(crate) fn poisson_tail_above(lambda: f64, t: u64) -> f64 {
    if lambda <= 0.0 {
        return 0.0;
    }
    gamma_lr((t + 1) as f64, lambda)
}

/// Poisson probability masses `P(X = 0..), X ~ Poisson(lambda)`, emitted
/// until all but `1e-12` of the mass is covered.
fn poisson_weights(lambda: f64) -> Vec<f64> {
    if lambda <= 0.0 {
        return vec![1.0];
    }
    let cap = (10.0 * (lambda + 10.0)) as usize;
    let mut weights = Vec::with_capacity((lambda as usize).min(cap) + 16);
    let mut cum = 0.0;
    if lambda <= 600.0 {
        let mut pmf = (-lambda).exp();
        for s in 0..=cap {
            weights.push(pmf);
            cum += pmf;
            if 1.0 - cum < 1e-12 {
                break;
            }
            pmf *= lambda / (s + 1) as f64;
        }
    } else {
        // exp(-lambda) underflows: evaluate each mass in log space.
        let ln_lambda = lambda.ln();
        for s in 0..=cap {
            let pmf = (s as f64 * ln_lambda - lambda - ln_gamma((s + 1) as f64)).exp();
            weights.push(pmf);
            cum += pmf;
            if s as f64 > lambda && 1.0 - cum < 1e-12 {
                break;
            }
        }
    }
    weights
}

fn predict_from_quantiles(
    quantiles: &[f64],
    n1: u64,
    n2: usize,
    population: u64,
    basis: PredictionBasis,
) -> Result<PredictionVector> {
    if n2 == 0 || quantiles.len() < n2 {
        return Err(Error::InvalidParameter(format!(
            "need quantiles for every rank 1..={n2}, got {}",
            quantiles.len()
        )));
    }
    if population == 0 {
        return Err(Error::InvalidParameter("population must be positive".into()));
    }
    for w in quantiles[..n2].windows(2) {
        if !(w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "degree quantiles must be non-increasing".into(),
            ));
        }
    }
    if quantiles[..n2].iter().any(|q| !q.is_finite() || *q < 0.0) {
        return Err(Error::InvalidParameter(
            "degree quantiles must be finite and non-negative".into(),
        ));
    }
    let rate = |f: f64| n1 as f64 * f / population as f64;
    let boundary_weights = poisson_weights(rate(quantiles[n2 - 1]));
    let p_hat = quantiles[..n2]
        .iter()
        .map(|&f| {
            let lambda = rate(f);
            boundary_weights
                .iter()
                .enumerate()
                .map(|(s, w)| w * poisson_tail_above(lambda, (s as u64).max(1)))
                .sum()
        })
        .collect();
    Ok(PredictionVector {
        p_hat,
        basis,
        n1,
        n2,
        population,
    })
}

/// Detection probabilities computed from the true degree order statistics
/// `order_stats[0] >= order_stats[1] >= ...` (at least `n2` of them).
pub fn poisson_predict(
    order_stats: &[u32],
    n1: u64,
    n2: usize,
    population: u64,
) -> Result<PredictionVector> {
    let quantiles: Vec<f64> = order_stats.iter().map(|&f| f as f64).collect();
    predict_from_quantiles(&quantiles, n1, n2, population, PredictionBasis::TrueQuantiles)
}

/// Expected fraction of the top `k` detected: the mean of the first `k`
/// per-rank probabilities.
pub fn expected_fraction(prediction: &PredictionVector, k: usize) -> Result<f64> {
    if k == 0 || k > prediction.n2 {
        return Err(Error::UndefinedBound {
            k,
            n2: prediction.n2,
        });
    }
    Ok(prediction.p_hat[..k].iter().sum::<f64>() / k as f64)
}

/// Expected first unsupported rank, treating per-rank detections as
/// independent: `1 + sum_i prod_{l<=i} p_l`.
pub fn expected_first_error(prediction: &PredictionVector) -> f64 {
    let mut expect = 1.0;
    let mut survive = 1.0;
    for &p in &prediction.p_hat {
        survive *= p;
        expect += survive;
    }
    expect
}

/// Tail-index estimate from the top order statistics: the mean log-ratio
/// of the `m` largest values to the `(m+1)`-th. For a survival function
/// `(x / x_min)^(-1/gamma)` this estimates `gamma`.
pub fn hill(order_stats: &[u32], m: usize) -> Result<f64> {
    if m < 1 || order_stats.len() < m + 1 {
        return Err(Error::InvalidParameter(format!(
            "tail estimation over {m} values needs {} order statistics, got {}",
            m + 1,
            order_stats.len()
        )));
    }
    let pivot = order_stats[m];
    if pivot == 0 {
        return Err(Error::InvalidParameter(
            "tail estimation needs a positive pivot order statistic".into(),
        ));
    }
    for w in order_stats[..=m].windows(2) {
        if w[1] > w[0] {
            return Err(Error::InvalidParameter(
                "order statistics must be non-increasing".into(),
            ));
        }
    }
    let pivot = pivot as f64;
    let sum: f64 = order_stats[..m]
        .iter()
        .map(|&x| (x as f64 / pivot).ln())
        .sum();
    Ok(sum / m as f64)
}

/// A fitted power tail: `gamma` from [`hill`] plus the pivot statistic it
/// extrapolates from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailFit {
    pub gamma: f64,
    pub m: usize,
    /// The m-th largest observed degree.
    pub f_m: u32,
}

pub fn tail_fit(order_stats: &[u32], m: usize) -> Result<TailFit> {
    let gamma = hill(order_stats, m)?;
    Ok(TailFit {
        gamma,
        m,
        f_m: order_stats[m - 1],
    })
}

/// Extrapolated degree of rank `j`: the observed `F_m` scaled down the
/// fitted power law, `F_m * (m / (j - 1))^gamma` for ranks beyond `m`.
pub fn evt_quantile(fit: &TailFit, j: usize) -> Result<f64> {
    if j <= fit.m {
        return Err(Error::InvalidParameter(format!(
            "rank {j} is inside the observed head (m = {})",
            fit.m
        )));
    }
    Ok(fit.f_m as f64 * (fit.m as f64 / (j - 1) as f64).powf(fit.gamma))
}

/// Detection probabilities with the degree quantiles spliced together
/// from a pilot measurement: ranks `1..=m` use the observed degrees,
/// ranks above `m` use the fitted tail.
pub fn evt_predict(
    observed_degrees: &[u32],
    m: usize,
    n1: u64,
    n2: usize,
    population: u64,
) -> Result<PredictionVector> {
    let fit = tail_fit(observed_degrees, m)?;
    let mut quantiles = Vec::with_capacity(n2);
    for j in 1..=n2 {
        if j <= m {
            quantiles.push(observed_degrees[j - 1] as f64);
        } else {
            quantiles.push(evt_quantile(&fit, j)?);
        }
    }
    predict_from_quantiles(
        &quantiles,
        n1,
        n2,
        population,
        PredictionBasis::TailSpliced { m },
    )
}

/// Stage split minimizing the predicted number of requests wasted on
/// wrong candidates under a pure power tail: `(3 gamma k^gamma n)` to the
/// power `1 / (gamma + 1)`, rounded and clamped into `[1, n - 1]`.
pub fn optimal_n2(n: u64, k: usize, gamma: f64) -> Result<usize> {
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "tail exponent must be positive and finite, got {gamma}"
        )));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if n < 2 {
        return Err(Error::InvalidParameter(
            "a budget below 2 cannot be split across two stages".into(),
        ));
    }
    let raw = (3.0 * gamma * (k as f64).powf(gamma) * n as f64).powf(1.0 / (gamma + 1.0));
    let rounded = raw.round().max(1.0) as u64;
    Ok(rounded.min(n - 1) as usize)
}

/// Normal approximation of the probability that the rank-`k` entity
/// out-scores the rank-`n2` entity in stage 1.
pub fn normal_approx_pk(n1: u64, population: u64, f_k: f64, f_n2: f64) -> f64 {
    let sum = f_k + f_n2;
    if sum <= 0.0 {
        return 0.5;
    }
    let z = (n1 as f64 / population as f64).sqrt() * (f_k - f_n2) / sum.sqrt();
    Normal::standard().cdf(z)
}

/// Smallest stage-1 size for which the rank-`k` entity out-scores the
/// rank-`n2` entity with probability at least `1 - epsilon`, under the
/// normal approximation with quantiles extrapolated from `fit`.
pub fn min_n1_bound(
    population: u64,
    k: usize,
    n2: usize,
    epsilon: f64,
    fit: &TailFit,
) -> Result<u64> {
    if k >= n2 {
        return Err(Error::UndefinedBound { k, n2 });
    }
    if !(0.0..1.0).contains(&epsilon) || epsilon <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    let f_k = if k <= fit.m {
        // Inside the observed head the fit only knows its edge value;
        // extrapolation is defined beyond m, so clamp to the pivot.
        fit.f_m as f64
    } else {
        evt_quantile(fit, k)?
    };
    let f_n2 = evt_quantile(fit, n2)?;
    let delta = f_k - f_n2;
    if delta <= 0.0 {
        return Err(Error::UndefinedBound { k, n2 });
    }
    let z = Normal::standard().inverse_cdf(1.0 - epsilon);
    let bound = population as f64 * z * z * (f_k + f_n2) / (delta * delta);
    Ok(bound.ceil() as u64)
}

/// Request cost scale of reaching the top of an `N`-entity catalog whose
/// tail flattens like `M^gamma`: `c * N / M^gamma`.
pub fn complexity_scale(c: f64, population: u64, catalog: u64, gamma: f64) -> f64 {
    c * population as f64 / (catalog as f64).powf(gamma)
}
