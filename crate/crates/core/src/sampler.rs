//! MCMC sampling of the centered Gibbs measure: Euler-Maruyama on the
//! centered dynamics, a Metropolis-adjusted variant whose acceptance step
//! uses exact energies (so it targets the Gibbs law without step-size bias),
//! and the Monte-Carlo estimator of confined-to-free partition ratios.

use crate::confining::{hat_v, z_eta, ConfiningSpec};
use crate::error::{Error, Result};
use crate::measures::{center, CenteredConfiguration, Configuration};
use crate::models::Model;
use crate::numerics::{ess, jackknife_se_of_mean, mean_and_se};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Em,
    Mala,
}

/// Chain configuration. The temperature lives on the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub n: usize,
    pub d: usize,
    pub step: f64,
    pub burn_in: u64,
    pub thin: u64,
    pub total_samples: u64,
    pub algorithm: Algorithm,
    pub seed: u64,
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidArgument(
                "at least two particles are required for a normalizable Gibbs law".into(),
            ));
        }
        if self.d == 0 {
            return Err(Error::InvalidArgument("dimension must be >= 1".into()));
        }
        if self.step <= 0.0 || self.step.is_nan() {
            return Err(Error::InvalidArgument("step size must be positive".into()));
        }
        if self.thin == 0 {
            return Err(Error::InvalidArgument("thinning stride must be >= 1".into()));
        }
        Ok(())
    }
}

/// Step size targeting a 0.5-0.7 acceptance rate for the shipped families
/// (scales like n^(-1/3), proportional to the temperature, damped by the
/// growth order of the potential).
pub fn default_step(model: &Model, n: usize) -> f64 {
    let scale = (n as f64).powf(-1.0 / 3.0);
    let ell = model.ell().max(1.0);
    match model {
        Model::Mv(_) => 1.25 * model.sigma_sq() * scale / (ell * ell),
        Model::Rb(_) => 1.25 * model.sigma_sq() * scale,
    }
}

/// Per-chain seed derivation: the master seed is xored with the
/// golden-ratio multiple of the chain index, then mixed through splitmix64.
pub fn derive_chain_seed(master: u64, chain: u64) -> u64 {
    splitmix64(master ^ chain.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One running chain: centered position, its RNG stream, move counters and
/// the cached configuration energy.
#[derive(Debug, Clone)]
pub struct ChainState {
    coords: Vec<f64>,
    n: usize,
    d: usize,
    rng: ChaCha8Rng,
    pub accepted: u64,
    pub proposed: u64,
    pub steps: u64,
    energy: f64,
}

impl ChainState {
    /// Deterministic start: equispaced points, centered, scaled so the
    /// translation-infimum moment of the model's growth order equals one.
    pub fn init(model: &Model, cfg: &SamplerConfig) -> Result<Self> {
        cfg.validate()?;
        if matches!(model, Model::Rb(_)) && cfg.d != 1 {
            return Err(Error::UnsupportedDimension(cfg.d));
        }
        let n = cfg.n;
        let ell = model.ell();
        let base: Vec<f64> = (0..n).map(|i| i as f64 - (n as f64 - 1.0) / 2.0).collect();
        let moment: f64 = base.iter().map(|u| u.abs().powf(ell)).sum::<f64>() / n as f64;
        let scale = moment.powf(-1.0 / ell);
        let mut coords = vec![0.0; n * cfg.d];
        for i in 0..n {
            for k in 0..cfg.d {
                coords[i * cfg.d + k] = base[i] * scale;
            }
        }
        project_to_zero_sum(&mut coords, n, cfg.d);
        let energy = model.energy(&Configuration::new(cfg.d, coords.clone())?)?;
        Ok(Self {
            coords,
            n,
            d: cfg.d,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            accepted: 0,
            proposed: 0,
            steps: 0,
            energy,
        })
    }

    pub fn position(&self) -> CenteredConfiguration {
        center(&Configuration::new(self.d, self.coords.clone()).expect("finite"))
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn acceptance_rate(&self) -> Option<f64> {
        if self.proposed == 0 {
            None
        } else {
            Some(self.accepted as f64 / self.proposed as f64)
        }
    }

    fn configuration(&self) -> Configuration {
        Configuration::new(self.d, self.coords.clone()).expect("finite")
    }
}

/// Subtract the per-dimension mean (orthogonal projection onto the zero-sum
/// subspace), then remove the O(eps) residual of the subtraction.
fn project_to_zero_sum(coords: &mut [f64], n: usize, d: usize) {
    for k in 0..d {
        let mean: f64 = (0..n).map(|i| coords[i * d + k]).sum::<f64>() / n as f64;
        for i in 0..n {
            coords[i * d + k] -= mean;
        }
        let resid: f64 = (0..n).map(|i| coords[i * d + k]).sum::<f64>() / n as f64;
        if resid != 0.0 {
            for i in 0..n {
                coords[i * d + k] -= resid;
            }
        }
    }
}

fn all_finite(coords: &[f64]) -> bool {
    coords.iter().all(|x| x.is_finite())
}

/// Euler-Maruyama proposal from the current position: drift step plus
/// projected Gaussian noise. Returns the proposed coordinates.
fn em_proposal(
    state: &mut ChainState,
    model: &Model,
    h: f64,
    drift: &[f64],
) -> Vec<f64> {
    let sigma = model.sigma_sq().sqrt();
    let amp = sigma * h.sqrt();
    let mut next = state.coords.clone();
    for (i, x) in next.iter_mut().enumerate() {
        let noise: f64 = state.rng.sample(StandardNormal);
        *x += h * drift[i] + amp * noise;
    }
    project_to_zero_sum(&mut next, state.n, state.d);
    next
}

/// One unadjusted step of the centered dynamics. Carries O(h) bias; the
/// Metropolis-adjusted variant is exact.
pub fn step_em(state: &mut ChainState, model: &Model, cfg: &SamplerConfig) -> Result<()> {
    let drift = model.drift(&state.configuration())?;
    let next = em_proposal(state, model, cfg.step, &drift);
    if !all_finite(&next) {
        return Err(Error::DivergedChain { step: state.steps });
    }
    state.coords = next;
    state.energy = model.energy(&state.configuration())?;
    state.steps += 1;
    Ok(())
}

/// Log acceptance ratio for a proposal `y` from `x`: energy difference plus
/// the forward/backward Gaussian proposal correction on the hyperplane.
#[allow(clippy::too_many_arguments)]
fn mala_log_alpha(
    model: &Model,
    x: &[f64],
    energy_x: f64,
    drift_x: &[f64],
    y: &[f64],
    h: f64,
    n: usize,
    d: usize,
) -> Result<(f64, f64)> {
    let y_cfg = Configuration::new(d, y.to_vec())?;
    let energy_y = model.energy(&y_cfg)?;
    let drift_y = model.drift(&y_cfg)?;
    let sigma_sq = model.sigma_sq();
    let mut fwd = 0.0; // |y - x - h drift(x)|^2
    let mut bwd = 0.0; // |x - y - h drift(y)|^2
    for i in 0..n * d {
        let f = y[i] - x[i] - h * drift_x[i];
        let b = x[i] - y[i] - h * drift_y[i];
        fwd += f * f;
        bwd += b * b;
    }
    let log_q_diff = (fwd - bwd) / (2.0 * sigma_sq * h);
    let log_alpha = -(2.0 * n as f64 / sigma_sq) * (energy_y - energy_x) + log_q_diff;
    Ok((log_alpha, energy_y))
}

/// One Metropolis-adjusted step: EM proposal, accepted with the exact
/// Gibbs-density ratio (the partition constant cancels).
pub fn step_mala(state: &mut ChainState, model: &Model, cfg: &SamplerConfig) -> Result<()> {
    let drift = model.drift(&state.configuration())?;
    let proposal = em_proposal(state, model, cfg.step, &drift);
    if !all_finite(&proposal) {
        return Err(Error::DivergedChain { step: state.steps });
    }
    let (log_alpha, energy_prop) = mala_log_alpha(
        model,
        &state.coords,
        state.energy,
        &drift,
        &proposal,
        cfg.step,
        state.n,
        state.d,
    )?;
    state.proposed += 1;
    let u: f64 = state.rng.random();
    if log_alpha >= 0.0 || u.ln() < log_alpha {
        state.coords = proposal;
        state.energy = energy_prop;
        state.accepted += 1;
    }
    state.steps += 1;
    Ok(())
}

impl ChainState {
    /// Runs `steps` moves of the configured algorithm.
    pub fn advance(&mut self, model: &Model, cfg: &SamplerConfig, steps: u64) -> Result<()> {
        for _ in 0..steps {
            match cfg.algorithm {
                Algorithm::Em => step_em(self, model, cfg)?,
                Algorithm::Mala => step_mala(self, model, cfg)?,
            }
        }
        Ok(())
    }
}

fn advance(state: &mut ChainState, model: &Model, cfg: &SamplerConfig, steps: u64) -> Result<()> {
    state.advance(model, cfg, steps)
}

/// Summary statistics of a finished run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Diagnostics {
    pub algorithm: Algorithm,
    /// None for the unadjusted integrator (which is flagged approximate).
    pub acceptance_rate: Option<f64>,
    pub exact_target: bool,
    pub ess_energy: f64,
    pub energy_mean: f64,
    pub energy_min: f64,
    pub energy_max: f64,
}

/// A set of equilibrium samples plus the configuration that produced it.
#[derive(Debug, Clone)]
pub struct SampleSet {
    pub config: SamplerConfig,
    pub sigma_sq: f64,
    pub configurations: Vec<CenteredConfiguration>,
    pub energies: Vec<f64>,
    pub diagnostics: Diagnostics,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.configurations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configurations.is_empty()
    }
}

/// Runs one chain to equilibrium and collects thinned samples.
/// Deterministic given the seed.
pub fn sample_equilibrium(model: &Model, cfg: &SamplerConfig) -> Result<SampleSet> {
    let mut state = ChainState::init(model, cfg)?;
    advance(&mut state, model, cfg, cfg.burn_in)?;
    let mut configurations = Vec::with_capacity(cfg.total_samples as usize);
    let mut energies = Vec::with_capacity(cfg.total_samples as usize);
    for _ in 0..cfg.total_samples {
        advance(&mut state, model, cfg, cfg.thin)?;
        configurations.push(state.position());
        energies.push(state.energy);
    }
    let (energy_mean, _) = mean_and_se(&energies);
    let diagnostics = Diagnostics {
        algorithm: cfg.algorithm,
        acceptance_rate: state.acceptance_rate(),
        exact_target: matches!(cfg.algorithm, Algorithm::Mala),
        ess_energy: if energies.is_empty() {
            0.0
        } else {
            ess(&energies)
        },
        energy_mean: if energies.is_empty() {
            f64::NAN
        } else {
            energy_mean
        },
        energy_min: energies.iter().cloned().fold(f64::INFINITY, f64::min),
        energy_max: energies.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    };
    Ok(SampleSet {
        config: *cfg,
        sigma_sq: model.sigma_sq(),
        configurations,
        energies,
        diagnostics,
    })
}

/// Monte-Carlo estimate of the confined-to-free partition ratio together
/// with its jackknife standard error and the deterministic cap
/// `z * n^(-d/l)` that the true ratio never exceeds.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PartitionRatioEstimate {
    pub ratio: f64,
    pub std_err: f64,
    pub cap: f64,
}

/// Estimates the partition ratio as the equilibrium average of the
/// exponential of the (negated, temperature-scaled) effective confining
/// potential.
pub fn estimate_partition_ratio(
    samples: &SampleSet,
    spec: &ConfiningSpec,
) -> Result<PartitionRatioEstimate> {
    if samples.is_empty() {
        return Err(Error::InsufficientData(
            "partition-ratio estimation needs at least one sample".into(),
        ));
    }
    if (spec.sigma_sq - samples.sigma_sq).abs() > 1e-12 {
        return Err(Error::InvalidArgument(
            "confining temperature differs from the sampling temperature".into(),
        ));
    }
    let n = samples.config.n as f64;
    let c = 2.0 * n / spec.sigma_sq;
    let mut weights = Vec::with_capacity(samples.len());
    for cc in &samples.configurations {
        weights.push((-c * hat_v(cc, spec)?).exp());
    }
    let (ratio, _) = mean_and_se(&weights);
    let std_err = jackknife_se_of_mean(&weights);
    let cap = z_eta(spec)? * n.powf(-(spec.d as f64) / spec.ell);
    Ok(PartitionRatioEstimate {
        ratio,
        std_err,
        cap,
    })
}

// ---------------------------------------------------------------------------
// Persistence: CSV of configurations plus a JSON sidecar.
// ---------------------------------------------------------------------------

pub const SAMPLES_FORMAT_VERSION: &str = "mfgibbs-samples-v1";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleSidecar {
    pub schema: String,
    pub config: SamplerConfig,
    pub sigma_sq: f64,
    pub model: Option<String>,
    pub diagnostics: Diagnostics,
}

/// One configuration per row, coordinates flattened row-major.
pub fn samples_to_csv(s: &SampleSet) -> String {
    let mut out = format!(
        "# {SAMPLES_FORMAT_VERSION} n={} d={}\n",
        s.config.n, s.config.d
    );
    for c in &s.configurations {
        let row: Vec<String> = c.coords().iter().map(|x| format!("{x:?}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn samples_sidecar(s: &SampleSet, model: Option<String>) -> String {
    serde_json::to_string_pretty(&SampleSidecar {
        schema: SAMPLES_FORMAT_VERSION.into(),
        config: s.config,
        sigma_sq: s.sigma_sq,
        model,
        diagnostics: s.diagnostics.clone(),
    })
    .expect("serializable")
}

/// Reconstructs a sample set from its CSV body and JSON sidecar.
pub fn samples_from_files(csv: &str, sidecar: &str) -> Result<SampleSet> {
    let meta: SampleSidecar =
        serde_json::from_str(sidecar).map_err(|e| Error::Config(format!("bad sidecar: {e}")))?;
    if meta.schema != SAMPLES_FORMAT_VERSION {
        return Err(Error::Config(format!(
            "unsupported samples schema {:?}",
            meta.schema
        )));
    }
    let d = meta.config.d;
    let mut configurations = Vec::new();
    for line in csv.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let coords: Vec<f64> = line
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("bad coordinate {t:?}: {e}")))
            })
            .collect::<Result<_>>()?;
        configurations.push(CenteredConfiguration::new(Configuration::new(
            d, coords,
        )?)?);
    }
    Ok(SampleSet {
        config: meta.config,
        sigma_sq: meta.sigma_sq,
        energies: Vec::new(),
        diagnostics: meta.diagnostics,
        configurations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::CENTERING_TOL;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn mv_quadratic() -> Model {
        Model::builtin("mv:quadratic", 2.0).unwrap()
    }

    fn rb_logistic() -> Model {
        Model::builtin("rb:logistic-flux", 2.0).unwrap()
    }

    fn cfg(n: usize, algorithm: Algorithm, seed: u64) -> SamplerConfig {
        SamplerConfig {
            n,
            d: 1,
            step: 0.05,
            burn_in: 500,
            thin: 2,
            total_samples: 500,
            algorithm,
            seed,
        }
    }

    #[test]
    fn config_validation() {
        let mut c = cfg(2, Algorithm::Em, 0);
        c.n = 1;
        assert!(c.validate().is_err());
        c = cfg(2, Algorithm::Em, 0);
        c.step = 0.0;
        assert!(c.validate().is_err());
        c = cfg(2, Algorithm::Em, 0);
        c.thin = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn init_is_centered_with_unit_moment() {
        let model = mv_quadratic();
        let c = cfg(7, Algorithm::Mala, 1);
        let state = ChainState::init(&model, &c).unwrap();
        let sum: f64 = state.coords().iter().sum();
        assert!(sum.abs() <= CENTERING_TOL * 7.0);
        let moment: f64 = state.coords().iter().map(|x| x * x).sum::<f64>() / 7.0;
        assert_relative_eq!(moment, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn samples_stay_centered() {
        for model in [mv_quadratic(), rb_logistic()] {
            let c = cfg(6, Algorithm::Mala, 3);
            let out = sample_equilibrium(&model, &c).unwrap();
            for s in &out.configurations {
                let sum: f64 = s.coords().iter().sum();
                assert!(sum.abs() <= CENTERING_TOL * 6.0, "sum {sum:e}");
            }
        }
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let model = rb_logistic();
        let c = cfg(5, Algorithm::Mala, 42);
        let a = sample_equilibrium(&model, &c).unwrap();
        let b = sample_equilibrium(&model, &c).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.configurations.iter().zip(&b.configurations) {
            assert_eq!(x.coords(), y.coords());
        }
        assert_eq!(a.energies, b.energies);
    }

    #[test]
    fn empty_request_is_valid() {
        let model = mv_quadratic();
        let mut c = cfg(4, Algorithm::Mala, 9);
        c.total_samples = 0;
        c.thin = 1;
        let out = sample_equilibrium(&model, &c).unwrap();
        assert!(out.is_empty());
        assert_eq!(out.diagnostics.ess_energy, 0.0);
    }

    #[test]
    fn mala_accepts_identity_and_downhill_proposals() {
        let model = rb_logistic();
        let n = 2;
        let x = [-1.0, 1.0];
        let x_cfg = Configuration::from_1d(&x).unwrap();
        let e_x = model.energy(&x_cfg).unwrap();
        let drift = model.drift(&x_cfg).unwrap();
        // Proposal equal to the current state: unit acceptance.
        let (log_alpha, _) =
            mala_log_alpha(&model, &x, e_x, &drift, &x, 0.1, n, 1).unwrap();
        assert_abs_diff_eq!(log_alpha, 0.0, epsilon = 1e-12);

        // Rank-preserving moves of the two-particle chain balance exactly
        // (constant drift), so any such move is accepted.
        let y = [-0.5, 0.5];
        let (log_alpha, e_y) =
            mala_log_alpha(&model, &x, e_x, &drift, &y, 0.1, n, 1).unwrap();
        assert!(e_y < e_x);
        assert!(log_alpha >= -1e-12, "log_alpha = {log_alpha}");

        // Quadratic pairwise drift: a downhill move along the drift wins
        // both the energy and the proposal correction.
        let model = mv_quadratic();
        let e_x = model.energy(&x_cfg).unwrap();
        let drift = model.drift(&x_cfg).unwrap();
        let (log_alpha, e_y) =
            mala_log_alpha(&model, &x, e_x, &drift, &y, 0.1, n, 1).unwrap();
        assert!(e_y < e_x);
        assert!(log_alpha > 0.1, "log_alpha = {log_alpha}");
    }

    #[test]
    fn zero_drift_zero_noise_leaves_position() {
        // A single EM step with h -> 0 keeps the position up to the noise
        // term; with the projection of a zero vector the position is fixed.
        let model = mv_quadratic();
        let c = cfg(3, Algorithm::Em, 7);
        let state = ChainState::init(&model, &c).unwrap();
        let mut coords = state.coords().to_vec();
        let drift = [0.0; 3];
        for (x, d) in coords.iter_mut().zip(drift) {
            *x += 0.0 * d;
        }
        project_to_zero_sum(&mut coords, 3, 1);
        assert_eq!(coords, state.coords());
    }

    #[test]
    fn mala_matches_exact_gaussian_variance() {
        // Quadratic pairwise interaction: per-coordinate equilibrium
        // variance (sigma^2/4)(1 - 1/n).
        let model = mv_quadratic();
        let n = 16;
        let c = SamplerConfig {
            n,
            d: 1,
            step: default_step(&model, n),
            burn_in: 2_000,
            thin: 3,
            total_samples: 30_000,
            algorithm: Algorithm::Mala,
            seed: 2024,
        };
        let out = sample_equilibrium(&model, &c).unwrap();
        let acc = out.diagnostics.acceptance_rate.unwrap();
        assert!((0.4..0.85).contains(&acc), "acceptance {acc}");
        let mut acc_var = 0.0;
        let mut count = 0.0;
        for s in &out.configurations {
            for &x in s.coords() {
                acc_var += x * x;
                count += 1.0;
            }
        }
        let var = acc_var / count;
        let expected = 2.0 / 4.0 * (1.0 - 1.0 / n as f64);
        assert_relative_eq!(var, expected, max_relative = 0.05);
    }

    #[test]
    fn rb_two_particle_gap_is_exponential() {
        // Stationary gap law: Exponential with rate 1/sigma^2.
        let model = rb_logistic();
        let c = SamplerConfig {
            n: 2,
            d: 1,
            step: 0.08,
            burn_in: 3_000,
            thin: 12,
            total_samples: 8_000,
            algorithm: Algorithm::Mala,
            seed: 7,
        };
        let out = sample_equilibrium(&model, &c).unwrap();
        let mut gaps: Vec<f64> = out
            .configurations
            .iter()
            .map(|s| (s.coords()[1] - s.coords()[0]).abs())
            .collect();
        let mean_gap = gaps.iter().sum::<f64>() / gaps.len() as f64;
        assert_relative_eq!(mean_gap, 2.0, max_relative = 0.1);
        let d = crate::numerics::ks_statistic(&mut gaps, |g| 1.0 - (-g / 2.0).exp());
        // 1% asymptotic critical value, padded for residual autocorrelation.
        let crit = 1.63 / (gaps.len() as f64).sqrt();
        assert!(d < 1.5 * crit, "KS statistic {d} vs {crit}");
    }

    #[test]
    fn em_and_mala_agree_on_gap_mean_at_small_step() {
        let model = rb_logistic();
        let base = SamplerConfig {
            n: 2,
            d: 1,
            step: 1e-3,
            burn_in: 20_000,
            thin: 40,
            total_samples: 4_000,
            algorithm: Algorithm::Em,
            seed: 11,
        };
        let gap_stats = |algorithm: Algorithm, seed: u64| {
            let mut c = base;
            c.algorithm = algorithm;
            c.seed = seed;
            let out = sample_equilibrium(&model, &c).unwrap();
            let gaps: Vec<f64> = out
                .configurations
                .iter()
                .map(|s| (s.coords()[1] - s.coords()[0]).abs())
                .collect();
            let (mean, se) = mean_and_se(&gaps);
            let neff = ess(&gaps);
            (mean, se * (gaps.len() as f64 / neff).sqrt())
        };
        let (m_em, se_em) = gap_stats(Algorithm::Em, 11);
        let (m_mala, se_mala) = gap_stats(Algorithm::Mala, 13);
        let combined = (se_em * se_em + se_mala * se_mala).sqrt();
        assert!(
            (m_em - m_mala).abs() <= 5.0 * combined,
            "EM {m_em} vs MALA {m_mala} (combined se {combined})"
        );
    }

    #[test]
    fn partition_ratio_against_quadrature_oracle() {
        // Two quadratic particles: everything reduces to the half-gap
        // coordinate, so the oracle is 1D quadrature.
        let model = mv_quadratic();
        let c = SamplerConfig {
            n: 2,
            d: 1,
            step: 0.15,
            burn_in: 2_000,
            thin: 4,
            total_samples: 20_000,
            algorithm: Algorithm::Mala,
            seed: 21,
        };
        let out = sample_equilibrium(&model, &c).unwrap();
        for eta in [0.4, 1.0] {
            let spec = ConfiningSpec::new(eta, 2.0, 1, 2.0).unwrap();
            let est = estimate_partition_ratio(&out, &spec).unwrap();
            let c_exp = 4.0 / 2.0; // 2n / sigma^2
            let weight = |t: f64| -> f64 {
                let conf = center(&Configuration::from_1d(&[-t, t]).unwrap());
                (-c_exp * hat_v(&conf, &spec).unwrap()).exp()
            };
            let gibbs = |t: f64| (-c_exp * t * t).exp();
            let num =
                crate::numerics::integrate_rel(&|t| weight(t) * gibbs(t), -30.0, 30.0, 1e-11)
                    .unwrap();
            let den = crate::numerics::integrate_rel(&gibbs, -30.0, 30.0, 1e-11).unwrap();
            let oracle = num / den;
            assert!(
                (est.ratio - oracle).abs() <= 3.0 * est.std_err,
                "eta {eta}: ratio {} vs oracle {oracle} (se {})",
                est.ratio,
                est.std_err
            );
            assert!(est.ratio <= est.cap + 2.0 * est.std_err);
        }
    }

    #[test]
    fn partition_ratio_monotone_in_eta_and_degenerate_case() {
        let model = mv_quadratic();
        let c = SamplerConfig {
            n: 4,
            d: 1,
            step: 0.1,
            burn_in: 500,
            thin: 2,
            total_samples: 2_000,
            algorithm: Algorithm::Mala,
            seed: 5,
        };
        let out = sample_equilibrium(&model, &c).unwrap();
        let est = |eta: f64| {
            estimate_partition_ratio(&out, &ConfiningSpec::new(eta, 2.0, 1, 2.0).unwrap())
                .unwrap()
                .ratio
        };
        let (r1, r2, r3) = (est(0.25), est(0.5), est(1.0));
        assert!(r1 > r2 && r2 > r3, "{r1} {r2} {r3}");

        // Degenerate all-zero sample set: the estimator is the single-point
        // weight.
        let zeros = CenteredConfiguration::new(Configuration::from_1d(&[0.0; 4]).unwrap()).unwrap();
        let degenerate = SampleSet {
            config: c,
            sigma_sq: 2.0,
            configurations: vec![zeros.clone(); 3],
            energies: vec![0.0; 3],
            diagnostics: out.diagnostics.clone(),
        };
        let spec = ConfiningSpec::new(0.7, 2.0, 1, 2.0).unwrap();
        let est0 = estimate_partition_ratio(&degenerate, &spec).unwrap();
        let expected = (-(2.0 * 4.0 / 2.0) * hat_v(&zeros, &spec).unwrap()).exp();
        assert_relative_eq!(est0.ratio, expected, max_relative = 1e-12);

        let empty = SampleSet {
            config: c,
            sigma_sq: 2.0,
            configurations: vec![],
            energies: vec![],
            diagnostics: out.diagnostics.clone(),
        };
        assert!(matches!(
            estimate_partition_ratio(&empty, &spec),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn cached_energy_tracks_recomputation() {
        for (model, algorithm) in [
            (mv_quadratic(), Algorithm::Mala),
            (rb_logistic(), Algorithm::Em),
        ] {
            let c = cfg(5, algorithm, 19);
            let mut state = ChainState::init(&model, &c).unwrap();
            for _ in 0..50 {
                state.advance(&model, &c, 1).unwrap();
                let recomputed = model.energy(&state.configuration()).unwrap();
                assert!(
                    (state.energy() - recomputed).abs() <= 1e-9,
                    "cached {} vs recomputed {recomputed}",
                    state.energy()
                );
            }
        }
    }

    #[test]
    fn two_dimensional_pairwise_sampling() {
        let model = mv_quadratic();
        let n = 8;
        let c = SamplerConfig {
            n,
            d: 2,
            step: default_step(&model, n),
            burn_in: 1_500,
            thin: 3,
            total_samples: 15_000,
            algorithm: Algorithm::Mala,
            seed: 61,
        };
        let out = sample_equilibrium(&model, &c).unwrap();
        // Per-dimension centering and the product-Gaussian variance law.
        let mut acc = [0.0f64; 2];
        let mut count = 0.0;
        for s in &out.configurations {
            for k in 0..2 {
                let sum: f64 = (0..n).map(|i| s.point(i)[k]).sum();
                assert!(sum.abs() <= CENTERING_TOL * n as f64);
                for i in 0..n {
                    acc[k] += s.point(i)[k] * s.point(i)[k];
                }
            }
            count += n as f64;
        }
        let expected = 2.0 / 4.0 * (1.0 - 1.0 / n as f64);
        for v in acc {
            assert_relative_eq!(v / count, expected, max_relative = 0.06);
        }
    }

    #[test]
    fn sample_files_round_trip() {
        let model = rb_logistic();
        let c = cfg(3, Algorithm::Mala, 77);
        let out = sample_equilibrium(&model, &c).unwrap();
        let csv = samples_to_csv(&out);
        let sidecar = samples_sidecar(&out, Some("rb:logistic-flux".into()));
        let back = samples_from_files(&csv, &sidecar).unwrap();
        assert_eq!(back.len(), out.len());
        for (a, b) in back.configurations.iter().zip(&out.configurations) {
            assert_eq!(a.coords(), b.coords());
        }
        assert_eq!(back.config, out.config);
    }

    #[test]
    fn derived_seeds_differ() {
        let s: Vec<u64> = (0..100).map(|i| derive_chain_seed(99, i)).collect();
        let mut dedup = s.clone();
        dedup.sort_unstable();
        dedup.dedup();
        assert_eq!(dedup.len(), s.len());
    }
}
