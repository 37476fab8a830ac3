//! Reference checks of the performance predictors: Monte-Carlo estimates
//! and independently coded routes must agree with the closed forms.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use topdeg_core::{
    evt_predict, evt_quantile, expected_fraction, fraction_correct, generate_from_degrees,
    ground_truth, min_n1_bound, normal_approx_pk, poisson_predict, two_stage, ApiOracle,
    OracleConfig, TailFit,
};

/// `P(X > max(Y, 1))` for independent Poisson draws, by simulation.
fn mc_exceedance(lambda_x: f64, lambda_y: f64, runs: u64, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = Poisson::new(lambda_x).unwrap();
    let y = Poisson::new(lambda_y).unwrap();
    let mut hits = 0u64;
    for _ in 0..runs {
        let xv: f64 = x.sample(&mut rng);
        let yv: f64 = y.sample(&mut rng);
        if xv > yv.max(1.0) {
            hits += 1;
        }
    }
    hits as f64 / runs as f64
}

#[test]
fn per_rank_probability_matches_simulated_poisson_races() {
    // Quantiles [3, 1] with n1 = population make the stage-1 hit counts
    // Poisson(3) and Poisson(1), racing a Poisson(1) boundary score.
    let p = poisson_predict(&[3, 1], 1000, 2, 1000).unwrap();
    let runs = 10_000_000u64;
    for (rank, lambda) in [(0usize, 3.0f64), (1, 1.0)] {
        let mc = mc_exceedance(lambda, 1.0, runs, 40 + rank as u64);
        let se = (mc * (1.0 - mc) / runs as f64).sqrt();
        assert!(
            (p.p_hat[rank] - mc).abs() <= 4.0 * se + 1e-4,
            "rank {rank}: closed form {} vs simulation {mc} (se {se:.6})",
            p.p_hat[rank]
        );
    }
}

#[test]
fn expected_fraction_tracks_real_runs_on_a_planted_tail() {
    // Power-law in-degrees planted exactly, so the prediction's quantile
    // input is the true degree sequence.
    let n: u32 = 10_000;
    let degrees: Vec<u32> = (1..=n)
        .map(|j| (30.0 * (50.0 / j as f64).powf(0.8)).floor() as u32)
        .collect();
    let g = generate_from_degrees(n, &degrees, 0.0, 404).unwrap();
    let truth = ground_truth(&g, n as usize).unwrap();
    let (n1, n2) = (1000u64, 50usize);
    let predicted = poisson_predict(truth.order_stats(), n1, n2, g.alive_count() as u64).unwrap();
    let runs = 2000u64;
    let mut sums = [0.0f64; 2];
    let ks = [5usize, 20];
    for rep in 0..runs {
        let mut oracle = ApiOracle::new(&g, OracleConfig::new(n1 + n2 as u64), 7000 + rep);
        let mut rng = ChaCha8Rng::seed_from_u64(9000 + rep);
        let r = two_stage(&mut oracle, n1, n2, &mut rng).unwrap();
        for (slot, &k) in ks.iter().enumerate() {
            sums[slot] += fraction_correct(&r.ids(), &truth, k).unwrap();
        }
    }
    for (slot, &k) in ks.iter().enumerate() {
        let empirical = sums[slot] / runs as f64;
        let model = expected_fraction(&predicted, k).unwrap();
        assert!(
            (empirical - model).abs() <= 0.05,
            "k = {k}: simulated fraction {empirical:.4} vs predicted {model:.4}"
        );
    }
}

#[test]
fn tail_extrapolation_reproduces_direct_predictions_on_a_power_sequence() {
    // Degrees follow the fitted family exactly, so predicting from the
    // observed head plus the extrapolated tail must agree with predicting
    // from the full true sequence.
    let stats: Vec<u32> = (1..=200u32)
        .map(|j| (1000.0 / (j as f64).sqrt()).floor() as u32)
        .collect();
    let (n1, n2, population) = (2000u64, 200usize, 100_000u64);
    let direct = poisson_predict(&stats, n1, n2, population).unwrap();
    let spliced = evt_predict(&stats, 30, n1, n2, population).unwrap();
    for j in 0..n2 {
        assert!(
            (direct.p_hat[j] - spliced.p_hat[j]).abs() <= 0.05,
            "rank {}: direct {:.4} vs spliced {:.4}",
            j + 1,
            direct.p_hat[j],
            spliced.p_hat[j]
        );
    }
}

#[test]
fn stage_one_bound_agrees_with_a_search_over_the_normal_approximation() {
    let population = 10_000_000u64;
    let searched_bound = |k: usize, n2: usize, epsilon: f64, fit: &TailFit| -> u64 {
        let f_k = if k <= fit.m {
            fit.f_m as f64
        } else {
            evt_quantile(fit, k).unwrap()
        };
        let f_n2 = evt_quantile(fit, n2).unwrap();
        let (mut lo, mut hi) = (1u64, population * 10);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if normal_approx_pk(mid, population, f_k, f_n2) >= 1.0 - epsilon {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        lo
    };
    let fit = TailFit {
        gamma: 0.5,
        m: 20,
        f_m: 10_000,
    };
    for (k, n2, epsilon) in [(50usize, 400usize, 0.05), (10, 400, 0.1), (100, 1000, 0.01)] {
        let closed = min_n1_bound(population, k, n2, epsilon, &fit).unwrap();
        let searched = searched_bound(k, n2, epsilon, &fit);
        assert!(
            closed.abs_diff(searched) <= 1,
            "k={k}, n2={n2}, eps={epsilon}: closed form {closed} vs search {searched}"
        );
    }
}
