//! Market weights and capital distribution curves: the ranked log-log view
//! of a configuration of log-capitalizations, its deterministic large-market
//! shape under the stationary density, and the atypicality comparison
//! between the interacting equilibrium and the independent surrogate.

use crate::densities::{quantile, rate_gap, stationary_rb, GridDensity, GridSpec};
use crate::error::{Error, Result};
use crate::ldp::{sanov_compare, CurveConfig, EventSpec, SanovComparison};
use crate::measures::Configuration;
use crate::models::RbModel;
use crate::sampler::SampleSet;
use serde::{Deserialize, Serialize};

/// Log-capitalizations together with their simplex weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketState {
    pub log_caps: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Computes market weights by the overflow-safe softmax: subtracting the
/// maximum before exponentiation also makes the weights exactly invariant
/// under common shifts whenever the shift arithmetic itself is exact.
pub fn market_weights(c: &Configuration) -> Result<MarketState> {
    if c.dim() != 1 {
        return Err(Error::UnsupportedDimension(c.dim()));
    }
    let xs = c.coords();
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = xs.iter().map(|x| (x - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    let weights: Vec<f64> = exps.iter().map(|e| e / total).collect();
    Ok(MarketState {
        log_caps: xs.to_vec(),
        weights,
    })
}

impl MarketState {
    /// Builds a state from externally supplied weights (plot ingestion
    /// only); weights must be positive and are renormalized onto the
    /// simplex.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidArgument("no weights supplied".into()));
        }
        if !weights.iter().all(|w| w.is_finite() && *w > 0.0) {
            return Err(Error::InvalidArgument(
                "weights must be positive and finite".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        let weights: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let log_caps = weights.iter().map(|w| w.ln()).collect();
        Ok(Self { log_caps, weights })
    }
}

/// Ranked log-log curve: `(log rank, log weight)` with weights sorted
/// descending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapitalCurve {
    pub points: Vec<(f64, f64)>,
}

/// Sorts the weights descending and emits the log-log pairs.
pub fn capital_curve(ms: &MarketState) -> Result<CapitalCurve> {
    let mut weights = ms.weights.clone();
    weights.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut points = Vec::with_capacity(weights.len());
    for (rank, w) in weights.iter().enumerate() {
        if *w <= 0.0 {
            return Err(Error::InvalidArgument(
                "zero market weight has no log-log representation".into(),
            ));
        }
        points.push((((rank + 1) as f64).ln(), w.ln()));
    }
    Ok(CapitalCurve { points })
}

/// The large-market deterministic curve: stationary quantiles at the
/// midpoint levels `(k - 1/2)/n`, exponentiated into weights.
pub fn typical_curve(model: &RbModel, n: usize, spec: GridSpec) -> Result<CapitalCurve> {
    if n == 0 {
        return Err(Error::InvalidArgument("market needs at least one stock".into()));
    }
    let p_inf = stationary_rb(model, spec)?;
    typical_curve_from_density(&p_inf, n)
}

/// As [`typical_curve`] with a precomputed stationary density.
pub fn typical_curve_from_density(p_inf: &GridDensity, n: usize) -> Result<CapitalCurve> {
    let qs: Vec<f64> = (1..=n)
        .map(|k| quantile(p_inf, (k as f64 - 0.5) / n as f64))
        .collect();
    let ms = market_weights(&Configuration::from_1d(&qs)?)?;
    capital_curve(&ms)
}

/// Curve estimated from equilibrium samples by pooling all sampled
/// positions and reading the market off their midpoint quantiles. Converges
/// to the large-market curve as the sample budget grows.
pub fn empirical_typical_curve(samples: &SampleSet) -> Result<CapitalCurve> {
    if samples.is_empty() {
        return Err(Error::InsufficientData(
            "cannot estimate a curve from zero samples".into(),
        ));
    }
    let n = samples.config.n;
    let mut pool: Vec<f64> = Vec::with_capacity(samples.len() * n);
    for conf in &samples.configurations {
        pool.extend_from_slice(conf.coords());
    }
    pool.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = pool.len() as f64;
    let qs: Vec<f64> = (1..=n)
        .map(|k| {
            let u = (k as f64 - 0.5) / n as f64;
            let t = u * m - 0.5;
            let lo = t.floor().max(0.0) as usize;
            let hi = (lo + 1).min(pool.len() - 1);
            let frac = (t - lo as f64).clamp(0.0, 1.0);
            pool[lo] * (1.0 - frac) + pool[hi] * frac
        })
        .collect();
    let ms = market_weights(&Configuration::from_1d(&qs)?)?;
    capital_curve(&ms)
}

/// Rank-averaged curve over a set of equilibrium samples: the expected
/// log-weight at each rank. Unlike [`empirical_typical_curve`] this carries
/// the finite-market offsets of the fluctuating normalizer and of the
/// extreme ranks.
pub fn mean_capital_curve(samples: &SampleSet) -> Result<CapitalCurve> {
    if samples.is_empty() {
        return Err(Error::InsufficientData(
            "cannot average a curve over zero samples".into(),
        ));
    }
    let n = samples.config.n;
    let mut acc = vec![0.0; n];
    for conf in &samples.configurations {
        let ms = market_weights(conf.as_configuration())?;
        let curve = capital_curve(&ms)?;
        for (i, &(_, logw)) in curve.points.iter().enumerate() {
            acc[i] += logw;
        }
    }
    let count = samples.len() as f64;
    Ok(CapitalCurve {
        points: (0..n)
            .map(|i| (((i + 1) as f64).ln(), acc[i] / count))
            .collect(),
    })
}

pub const CURVE_FORMAT_VERSION: &str = "mfgibbs-curve-v1";

/// Two-column CSV (log rank, log weight), plot-ready.
pub fn curve_to_csv(c: &CapitalCurve) -> String {
    let mut out = format!("# {CURVE_FORMAT_VERSION} log-rank,log-weight\n");
    for &(lr, lw) in &c.points {
        out.push_str(&format!("{lr:?},{lw:?}\n"));
    }
    out
}

pub fn curve_from_csv(text: &str) -> Result<CapitalCurve> {
    let mut points = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split(',');
        let lr = cols
            .next()
            .and_then(|t| t.trim().parse::<f64>().ok())
            .ok_or_else(|| Error::Config("bad curve row".into()))?;
        let lw = cols
            .next()
            .and_then(|t| t.trim().parse::<f64>().ok())
            .ok_or_else(|| Error::Config("bad curve row".into()))?;
        points.push((lr, lw));
    }
    Ok(CapitalCurve { points })
}

/// One weight per line (a comment header is allowed).
pub fn weights_from_csv(text: &str) -> Result<Vec<f64>> {
    let mut weights = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        for col in line.split(',') {
            weights.push(
                col.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("bad weight {col:?}: {e}")))?,
            );
        }
    }
    Ok(weights)
}

/// Combined report: paired event probabilities under the interacting law
/// and the independent surrogate, slope comparison data, and the
/// flux-curvature certificate of the rate inequality.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AtypicalityReport {
    pub comparison: SanovComparison,
    pub flux_is_concave: bool,
    /// Largest curvature part of the rate decomposition over the probe
    /// densities; nonpositive for concave flux.
    pub gamma_certificate: f64,
}

/// Second derivative of the flux, sampled to decide concavity.
fn flux_is_concave(model: &RbModel) -> bool {
    let grid = 2_000;
    (0..=grid).all(|i| {
        let u = i as f64 / grid as f64;
        flux_second(model, u) <= 1e-12
    })
}

fn flux_second(model: &RbModel, u: f64) -> f64 {
    let mut acc = 0.0;
    for (j, &c) in model.coeffs.iter().enumerate().skip(2).rev() {
        acc = acc * u + c * (j * (j - 1)) as f64;
    }
    acc
}

/// Runs the paired comparison and evaluates the curvature certificate on
/// shifted and rescaled probes of the stationary density.
pub fn atypicality_report(
    model: &RbModel,
    event: &EventSpec,
    n_list: &[usize],
    cfg: &CurveConfig,
    spec: GridSpec,
) -> Result<AtypicalityReport> {
    let comparison = sanov_compare(model, event, n_list, cfg, spec)?;
    let p_inf = stationary_rb(model, spec)?;
    let mut gamma_certificate = f64::NEG_INFINITY;
    let dx = spec.dx();
    let shift_cells = (1.0 / dx).round() as i64;
    let probes = [
        p_inf.translate_cells(shift_cells)?,
        p_inf.translate_cells(-2 * shift_cells)?,
        GridDensity::from_fn(spec, |x| {
            let e = (-x.abs() / 1.4).exp();
            e / (1.0 + e).powi(2)
        })?,
    ];
    for probe in &probes {
        let gap = rate_gap(probe, model, &p_inf)?;
        gamma_certificate = gamma_certificate.max(gap.gamma_part);
    }
    Ok(AtypicalityReport {
        comparison,
        flux_is_concave: flux_is_concave(model),
        gamma_certificate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn rb() -> RbModel {
        RbModel::new(vec![0.0, 1.0, -1.0], 2.0).unwrap()
    }

    #[test]
    fn equal_positions_give_uniform_weights() {
        let ms = market_weights(&Configuration::from_1d(&[1.5; 4]).unwrap()).unwrap();
        for w in &ms.weights {
            assert_abs_diff_eq!(*w, 0.25, epsilon = 1e-15);
        }
    }

    #[test]
    fn two_stock_example() {
        let ms = market_weights(&Configuration::from_1d(&[0.0, 3.0f64.ln()]).unwrap()).unwrap();
        assert_abs_diff_eq!(ms.weights[0], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(ms.weights[1], 0.75, epsilon = 1e-15);
    }

    #[test]
    fn weights_shift_invariant_bitwise() {
        // Lattice-valued positions keep the shift arithmetic exact.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let xs: Vec<f64> = (0..12)
                .map(|_| rng.random_range(-4096..4096) as f64 / 1024.0)
                .collect();
            let shifted: Vec<f64> = xs.iter().map(|x| x + 100.0).collect();
            let a = market_weights(&Configuration::from_1d(&xs).unwrap()).unwrap();
            let b = market_weights(&Configuration::from_1d(&shifted).unwrap()).unwrap();
            assert_eq!(a.weights, b.weights);
        }
    }

    #[test]
    fn weights_sum_to_one() {
        let ms = market_weights(&Configuration::from_1d(&[3.0, -2.0, 0.5, 8.0]).unwrap()).unwrap();
        let sum: f64 = ms.weights.iter().sum();
        assert!((sum - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn curve_of_two_weights() {
        let ms = MarketState::from_weights(vec![0.25, 0.75]).unwrap();
        let curve = capital_curve(&ms).unwrap();
        assert_abs_diff_eq!(curve.points[0].0, 0.0);
        assert_abs_diff_eq!(curve.points[0].1, 0.75f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(curve.points[1].0, 2.0f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(curve.points[1].1, 0.25f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn curves_are_non_increasing() {
        let ms = market_weights(
            &Configuration::from_1d(&[0.3, -1.2, 2.0, 0.0, -0.4, 1.1]).unwrap(),
        )
        .unwrap();
        let curve = capital_curve(&ms).unwrap();
        for w in curve.points.windows(2) {
            assert!(w[1].1 <= w[0].1 + 1e-15);
        }
    }

    #[test]
    fn typical_curve_matches_logistic_quantiles() {
        let spec = GridSpec::new(-40.0, 40.0, 16_000).unwrap();
        let n = 16;
        let curve = typical_curve(&rb(), n, spec).unwrap();
        // Logistic quantiles in closed form.
        let qs: Vec<f64> = (1..=n)
            .map(|k| {
                let u = (k as f64 - 0.5) / n as f64;
                (u / (1.0 - u)).ln()
            })
            .collect();
        let expected =
            capital_curve(&market_weights(&Configuration::from_1d(&qs).unwrap()).unwrap()).unwrap();
        for (a, b) in curve.points.iter().zip(&expected.points) {
            assert_abs_diff_eq!(a.1, b.1, epsilon = 1e-5);
        }
    }

    #[test]
    fn single_stock_curve_is_origin() {
        let spec = GridSpec::new(-40.0, 40.0, 2_000).unwrap();
        let curve = typical_curve(&rb(), 1, spec).unwrap();
        assert_eq!(curve.points.len(), 1);
        assert_abs_diff_eq!(curve.points[0].0, 0.0);
        assert_abs_diff_eq!(curve.points[0].1, 0.0);
    }

    #[test]
    fn curve_csv_round_trip() {
        let ms = MarketState::from_weights(vec![0.5, 0.3, 0.2]).unwrap();
        let curve = capital_curve(&ms).unwrap();
        let csv = curve_to_csv(&curve);
        assert_eq!(curve_from_csv(&csv).unwrap(), curve);
        let ws = weights_from_csv("# w\n0.5\n0.3\n0.2\n").unwrap();
        assert_eq!(ws, vec![0.5, 0.3, 0.2]);
    }

    #[test]
    fn concavity_detection() {
        assert!(flux_is_concave(&rb()));
        // u^2 (1 - u) is convex near zero.
        let not_concave = RbModel::new(vec![0.0, 0.0, 1.0, -1.0], 2.0).unwrap();
        assert!(!flux_is_concave(&not_concave));
    }

    #[test]
    fn atypicality_report_smoke() {
        let spec = GridSpec::new(-40.0, 40.0, 8_000).unwrap();
        let event = EventSpec::MeanAbsAtLeast { threshold: 1.8 };
        let cfg = CurveConfig {
            chains_per_n: 200,
            burn_in: 400,
            step: None,
            seed: 31,
            threads: 0,
        };
        let report = atypicality_report(&rb(), &event, &[8, 16], &cfg, spec).unwrap();
        assert!(report.flux_is_concave);
        assert!(report.gamma_certificate <= 1e-10);
        assert!(report.comparison.reference.is_some());
        assert_eq!(report.comparison.interacting.rows.len(), 2);
    }
}
