//! Distributional checks of the equilibrium sampler against independent
//! oracles: the rank-based Gibbs law factorizes into independent exponential
//! gaps, which gives an exact reference sampler, and the large-market curve
//! must match the rank-averaged sampled curve.

use mfgibbs::densities::GridSpec;
use mfgibbs::models::{Model, RbModel};
use mfgibbs::numerics::{ess, mean_and_se};
use mfgibbs::sampler::{default_step, sample_equilibrium, Algorithm, SamplerConfig};
use mfgibbs::spt::{empirical_typical_curve, mean_capital_curve, typical_curve};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Draws exactly from the rank-based equilibrium: the sorted gaps are
/// independent exponentials with rates `(2n/sigma^2) B(k/n)`.
fn exact_mean_abs_samples(n: usize, sigma_sq: f64, reps: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let flux = |u: f64| u * (1.0 - u);
    let rates: Vec<f64> = (1..n)
        .map(|k| 2.0 * n as f64 / sigma_sq * flux(k as f64 / n as f64))
        .collect();
    let mut out = Vec::with_capacity(reps);
    let mut pos = vec![0.0f64; n];
    for _ in 0..reps {
        pos[0] = 0.0;
        for k in 1..n {
            let u: f64 = rng.random();
            pos[k] = pos[k - 1] - u.ln() / rates[k - 1];
        }
        let mean = pos.iter().sum::<f64>() / n as f64;
        out.push(pos.iter().map(|x| (x - mean).abs()).sum::<f64>() / n as f64);
    }
    out
}

#[test]
fn mala_matches_exact_gap_law() {
    let n = 16;
    let model = Model::Rb(RbModel::new(vec![0.0, 1.0, -1.0], 2.0).unwrap());
    let cfg = SamplerConfig {
        n,
        d: 1,
        step: default_step(&model, n),
        burn_in: 2_000,
        thin: 4,
        total_samples: 20_000,
        algorithm: Algorithm::Mala,
        seed: 314,
    };
    let set = sample_equilibrium(&model, &cfg).unwrap();
    let sampled: Vec<f64> = set
        .configurations
        .iter()
        .map(|c| c.coords().iter().map(|x| x.abs()).sum::<f64>() / n as f64)
        .collect();
    let exact = exact_mean_abs_samples(n, 2.0, 200_000, 2_718);

    let (m_mcmc, se_raw) = mean_and_se(&sampled);
    let neff = ess(&sampled);
    let se_mcmc = se_raw * (sampled.len() as f64 / neff).sqrt();
    let (m_exact, se_exact) = mean_and_se(&exact);
    let combined = (se_mcmc * se_mcmc + se_exact * se_exact).sqrt();
    assert!(
        (m_mcmc - m_exact).abs() <= 5.0 * combined,
        "MCMC {m_mcmc} vs exact {m_exact} (combined se {combined})"
    );

    // Tail probabilities agree too.
    for a in [1.5, 1.7] {
        let p_mcmc = sampled.iter().filter(|&&s| s >= a).count() as f64 / sampled.len() as f64;
        let p_exact = exact.iter().filter(|&&s| s >= a).count() as f64 / exact.len() as f64;
        let se = (p_mcmc * (1.0 - p_mcmc) / neff).sqrt();
        assert!(
            (p_mcmc - p_exact).abs() <= 5.0 * se.max(1e-4),
            "a={a}: {p_mcmc} vs {p_exact}"
        );
    }
}

#[test]
fn mala_reproduces_projected_gaussian_covariance() {
    // Quadratic pairwise interaction: the centered equilibrium is Gaussian
    // with covariance (sigma^2/4)(I - 11'/n) on the zero-sum hyperplane.
    // Across-chain standard errors keep the entry-wise comparison honest.
    let n = 8;
    let sigma_sq = 2.0;
    let model = Model::builtin("mv:quadratic", sigma_sq).unwrap();
    let chains = 24;
    let per_chain: Vec<Vec<f64>> = (0..chains)
        .map(|c| {
            let cfg = SamplerConfig {
                n,
                d: 1,
                step: default_step(&model, n),
                burn_in: 1_500,
                thin: 4,
                total_samples: 8_000,
                algorithm: Algorithm::Mala,
                seed: 52_000 + c,
            };
            let set = sample_equilibrium(&model, &cfg).unwrap();
            let mut cov = vec![0.0; n * n];
            for conf in &set.configurations {
                let x = conf.coords();
                for i in 0..n {
                    for j in 0..n {
                        cov[i * n + j] += x[i] * x[j];
                    }
                }
            }
            cov.iter_mut().for_each(|v| *v /= set.len() as f64);
            cov
        })
        .collect();
    for i in 0..n {
        for j in 0..n {
            let entries: Vec<f64> = per_chain.iter().map(|c| c[i * n + j]).collect();
            let (mean, se) = mean_and_se(&entries);
            let expected = sigma_sq / 4.0
                * (if i == j { 1.0 } else { 0.0 } - 1.0 / n as f64);
            assert!(
                (mean - expected).abs() <= 5.0 * se,
                "cov[{i}][{j}] = {mean} vs {expected} (se {se})"
            );
        }
    }
}

#[test]
fn sampled_curve_matches_large_market_shape() {
    let n = 64;
    let rb = RbModel::new(vec![0.0, 1.0, -1.0], 2.0).unwrap();
    let model = Model::Rb(rb.clone());
    let cfg = SamplerConfig {
        n,
        d: 1,
        step: default_step(&model, n),
        burn_in: 2_000,
        thin: 3,
        total_samples: 10_000,
        algorithm: Algorithm::Mala,
        seed: 11_235,
    };
    let set = sample_equilibrium(&model, &cfg).unwrap();
    let spec = GridSpec::new(-40.0, 40.0, 16_000).unwrap();
    let typical = typical_curve(&rb, n, spec).unwrap();

    let estimated = empirical_typical_curve(&set).unwrap();
    let sup: f64 = estimated
        .points
        .iter()
        .zip(&typical.points)
        .map(|(a, b)| (a.1 - b.1).abs())
        .fold(0.0, f64::max);
    assert!(sup < 0.05, "sup log-weight distance {sup}");

    // The rank-averaged expected curve carries the finite-market offsets of
    // the fluctuating normalizer; it stays within a coarser band.
    let averaged = mean_capital_curve(&set).unwrap();
    let sup_avg: f64 = averaged
        .points
        .iter()
        .zip(&typical.points)
        .map(|(a, b)| (a.1 - b.1).abs())
        .fold(0.0, f64::max);
    assert!(sup_avg < 0.3, "rank-averaged sup distance {sup_avg}");
}
