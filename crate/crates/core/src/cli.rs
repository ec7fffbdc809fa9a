//! Command orchestration: builds the objects a subcommand needs from the
//! run configuration, executes it, writes the artifacts (CSV for tabular
//! numerics, JSON for reports) and a manifest that allows bit-exact re-runs.

use crate::config::{MetricBaseName, RunConfig};
use crate::densities::{
    density_from_files, density_sidecar, density_to_csv, entropy, energy_of_density,
    fokker_planck_residual_l1, free_energy, minimize_free_energy_mv_with, rate, rate_gap,
    stationary_rb_with, GridDensity,
};
use crate::error::{Error, Result};
use crate::ldp::{
    estimate_ldp_curve, rate_infimum_with, verify_tilting, LdpEstimate, LdpRow, TiltingReport,
};
use crate::measures::{
    measure_from_csv, prohorov_1d, quotient_distance, wasserstein_1d, QuotientBase,
};
use crate::models::{check_assumptions, Model};
use crate::sampler::{sample_equilibrium, samples_sidecar, samples_to_csv};
use crate::spt::{
    atypicality_report, capital_curve, curve_to_csv, empirical_typical_curve,
    typical_curve_from_density, weights_from_csv, MarketState,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt;
use std::fs;
use std::path::Path;

pub const MANIFEST_FORMAT_VERSION: &str = "mfgibbs-manifest-v1";
pub const LDP_FORMAT_VERSION: &str = "mfgibbs-ldp-v1";
pub const METRICS_FORMAT_VERSION: &str = "mfgibbs-metrics-v1";

/// The CLI surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    CheckModel,
    Sample,
    Stationary,
    Rate,
    Ldp,
    Tilting,
    CapitalCurve,
    Metrics,
}

impl fmt::Display for CommandName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CommandName::CheckModel => "check-model",
            CommandName::Sample => "sample",
            CommandName::Stationary => "stationary",
            CommandName::Rate => "rate",
            CommandName::Ldp => "ldp",
            CommandName::Tilting => "tilting",
            CommandName::CapitalCurve => "capital-curve",
            CommandName::Metrics => "metrics",
        };
        f.write_str(s)
    }
}

/// Exit-status classification: configuration problems, numerical failures
/// and i/o failures are distinguishable by the caller.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::InvalidArgument(_)
        | Error::InvalidOrder(_)
        | Error::IncompatibleGrids(_)
        | Error::DimensionMismatch { .. }
        | Error::UnsupportedDimension(_)
        | Error::NotImplemented(_) => 2,
        Error::ConvergenceFailure { .. }
        | Error::DivergedChain { .. }
        | Error::QuadratureFailure(_)
        | Error::InsufficientData(_) => 3,
        Error::Io(_) => 4,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: String,
    pub command: CommandName,
    pub config_toml: String,
    pub config_sha256: String,
    pub version: String,
    pub artifacts: Vec<String>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let out = hasher.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

/// Executes a subcommand against a resolved configuration, writing every
/// artifact plus `manifest.json` into `out_dir`. Returns the artifact file
/// names.
pub fn execute(command: CommandName, config: &RunConfig, out_dir: &Path) -> Result<Vec<String>> {
    fs::create_dir_all(out_dir)?;
    let artifacts = match command {
        CommandName::CheckModel => run_check_model(config, out_dir)?,
        CommandName::Sample => run_sample(config, out_dir)?,
        CommandName::Stationary => run_stationary(config, out_dir)?,
        CommandName::Rate => run_rate(config, out_dir)?,
        CommandName::Ldp => run_ldp(config, out_dir)?,
        CommandName::Tilting => run_tilting(config, out_dir)?,
        CommandName::CapitalCurve => run_capital_curve(config, out_dir)?,
        CommandName::Metrics => run_metrics(config, out_dir)?,
    };
    let config_toml = config.to_toml();
    let manifest = Manifest {
        schema: MANIFEST_FORMAT_VERSION.into(),
        command,
        config_sha256: sha256_hex(config_toml.as_bytes()),
        config_toml,
        version: env!("CARGO_PKG_VERSION").into(),
        artifacts: artifacts.clone(),
    };
    fs::write(
        out_dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest).expect("serializable"),
    )?;
    Ok(artifacts)
}

/// Re-executes the run recorded in a manifest; with the same build this
/// reproduces every artifact byte for byte.
pub fn rerun(manifest_path: &Path, out_dir: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(manifest_path)?;
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("bad manifest: {e}")))?;
    if manifest.schema != MANIFEST_FORMAT_VERSION {
        return Err(Error::Config(format!(
            "unsupported manifest schema {:?}",
            manifest.schema
        )));
    }
    if sha256_hex(manifest.config_toml.as_bytes()) != manifest.config_sha256 {
        return Err(Error::Config("manifest config hash mismatch".into()));
    }
    let config = RunConfig::from_toml(&manifest.config_toml)?;
    execute(manifest.command, &config, out_dir)
}

fn write_artifact(out_dir: &Path, name: &str, content: &str) -> Result<()> {
    fs::write(out_dir.join(name), content)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Subcommands.
// ---------------------------------------------------------------------------

fn run_check_model(config: &RunConfig, out_dir: &Path) -> Result<Vec<String>> {
    let (model, section) = config.model()?;
    let check = config.check.clone().unwrap_or(crate::config::CheckSection {
        samples: 200,
        seed: 0,
    });
    let report = check_assumptions(&model, check.samples, check.seed)?;
    let body = serde_json::json!({
        "schema": "mfgibbs-check-v1",
        "model": section.id(),
        "report": report,
    });
    write_artifact(
        out_dir,
        "check-model.json",
        &serde_json::to_string_pretty(&body).expect("serializable"),
    )?;
    Ok(vec!["check-model.json".into()])
}

fn run_sample(config: &RunConfig, out_dir: &Path) -> Result<Vec<String>> {
    let (model, section) = config.model()?;
    let sampler = config
        .sampler
        .as_ref()
        .ok_or_else(|| Error::Config("missing [sampler] section".into()))?
        .build(&model)?;
    let set = sample_equilibrium(&model, &sampler)?;
    write_artifact(out_dir, "samples.csv", &samples_to_csv(&set))?;
    write_artifact(
        out_dir,
        "samples.json",
        &samples_sidecar(&set, Some(section.id())),
    )?;
    Ok(vec!["samples.csv".into(), "samples.json".into()])
}

/// Stationary density: the fixed point for rank-based models, the direct
/// free-energy minimizer for pairwise models.
fn stationary_density(config: &RunConfig, model: &Model) -> Result<GridDensity> {
    let spec = config.grid_for(model.sigma_sq())?;
    match model {
        Model::Rb(rb) => {
            let opts = config.stationary.unwrap_or_default().build();
            stationary_rb_with(rb, spec, opts)
        }
        Model::Mv(mv) => {
            let opts = config
                .minimize
                .unwrap_or_default()
                .build();
            Ok(minimize_free_energy_mv_with(mv, spec, opts)?.0)
        }
    }
}

fn run_stationary(config: &RunConfig, out_dir: &Path) -> Result<Vec<String>> {
    let (model, section) = config.model()?;
    let density = stationary_density(config, &model)?;
    let f_star = free_energy(&density, &model);
    let residual = match &model {
        Model::Rb(rb) => Some(fokker_planck_residual_l1(&density, rb)),
        Model::Mv(_) => None,
    };
    write_artifact(out_dir, "density.csv", &density_to_csv(&density))?;
    write_artifact(
        out_dir,
        "density.json",
        &density_sidecar(&density, Some(model.sigma_sq()), Some(section.id())),
    )?;
    let summary = serde_json::json!({
        "schema": "mfgibbs-stationary-v1",
        "model": section.id(),
        "free_energy": f_star,
        "mean": density.mean(),
        "fokker_planck_residual_l1": residual,
    });
    write_artifact(
        out_dir,
        "stationary.json",
        &serde_json::to_string_pretty(&summary).expect("serializable"),
    )?;
    Ok(vec![
        "density.csv".into(),
        "density.json".into(),
        "stationary.json".into(),
    ])
}

fn run_rate(config: &RunConfig, out_dir: &Path) -> Result<Vec<String>> {
    let (model, section) = config.model()?;
    let reference = stationary_density(config, &model)?;
    let f_star = free_energy(&reference, &model);
    let rate_section = config.rate.clone().unwrap_or(crate::config::RateSection {
        density_csv: None,
        density_sidecar: None,
    });
    let (density, source) = match (&rate_section.density_csv, &rate_section.density_sidecar) {
        (Some(csv), Some(sidecar)) => (
            density_from_files(&fs::read_to_string(csv)?, &fs::read_to_string(sidecar)?)?,
            csv.clone(),
        ),
        (None, None) => (reference.clone(), "stationary".to_string()),
        _ => {
            return Err(Error::Config(
                "rate evaluation needs both density_csv and density_sidecar".into(),
            ))
        }
    };
    let gap = match &model {
        Model::Rb(rb) => Some(rate_gap(&density, rb, &reference)?),
        Model::Mv(_) => None,
    };
    let body = serde_json::json!({
        "schema": "mfgibbs-rate-v1",
        "model": section.id(),
        "density_source": source,
        "f_star": f_star,
        "entropy": entropy(&density),
        "energy": energy_of_density(&density, &model),
        "free_energy": free_energy(&density, &model),
        "rate": rate(&density, &model, f_star),
        "rate_gap": gap,
    });
    write_artifact(
        out_dir,
        "rate.json",
        &serde_json::to_string_pretty(&body).expect("serializable"),
    )?;
    Ok(vec!["rate.json".into()])
}

/// Plot-ready projection of an estimate table.
pub fn ldp_to_csv(estimate: &LdpEstimate) -> String {
    let mut out = format!("# {LDP_FORMAT_VERSION} n,hits,chains,p_hat,slope,slope_lo,slope_hi\n");
    for r in &estimate.rows {
        let slope = r
            .slope
            .map(|s| format!("{s:?}"))
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{:?},{},{:?},{:?}\n",
            r.n, r.hits, r.chains, r.p_hat, slope, r.slope_lo, r.slope_hi
        ));
    }
    out
}

pub fn ldp_rows_from_csv(text: &str) -> Result<Vec<LdpRow>> {
    let mut rows = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 7 {
            return Err(Error::Config("ldp CSV row needs 7 columns".into()));
        }
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("bad number {s:?}: {e}")))
        };
        rows.push(LdpRow {
            n: cols[0]
                .trim()
                .parse()
                .map_err(|e| Error::Config(format!("bad n: {e}")))?,
            hits: cols[1]
                .trim()
                .parse()
                .map_err(|e| Error::Config(format!("bad hits: {e}")))?,
            chains: cols[2]
                .trim()
                .parse()
                .map_err(|e| Error::Config(format!("bad chains: {e}")))?,
            p_hat: parse(cols[3])?,
            slope: if cols[4].trim().is_empty() {
                None
            } else {
                Some(parse(cols[4])?)
            },
            slope_lo: parse(cols[5])?,
            slope_hi: parse(cols[6])?,
        });
    }
    Ok(rows)
}

fn run_ldp(config: &RunConfig, out_dir: &Path) -> Result<Vec<String>> {
    let (model, section) = config.model()?;
    let ldp = config
        .ldp
        .as_ref()
        .ok_or_else(|| Error::Config("missing [ldp] section".into()))?;
    let event = ldp.event.build()?;
    let cfg = ldp.curve_config();
    let spec = config.grid_for(model.sigma_sq())?;

    let mut artifacts = Vec::new();
    match &model {
        Model::Rb(rb) => {
            // Rank-based models get the full paired comparison plus the
            // curvature certificate.
            let report = atypicality_report(rb, &event, &ldp.n_list, &cfg, spec)?;
            write_artifact(
                out_dir,
                "ldp.csv",
                &ldp_to_csv(&report.comparison.interacting),
            )?;
            write_artifact(
                out_dir,
                "ldp-surrogate.csv",
                &ldp_to_csv(&report.comparison.surrogate),
            )?;
            let body = serde_json::json!({
                "schema": "mfgibbs-ldp-v1",
                "model": section.id(),
                "report": report,
            });
            write_artifact(
                out_dir,
                "ldp.json",
                &serde_json::to_string_pretty(&body).expect("serializable"),
            )?;
            artifacts.extend([
                "ldp.csv".to_string(),
                "ldp-surrogate.csv".to_string(),
                "ldp.json".to_string(),
            ]);
        }
        Model::Mv(mv) => {
            let (p_inf, f_star) = minimize_free_energy_mv_with(
                mv,
                spec,
                config.minimize.unwrap_or_default().build(),
            )?;
            let mut estimate = estimate_ldp_curve(&model, &event, &ldp.n_list, &cfg, Some(&p_inf))?;
            estimate.reference = match rate_infimum_with(&model, &event, &p_inf, f_star) {
                Ok(r) => Some(r),
                Err(Error::NotImplemented(_)) => None,
                Err(e) => return Err(e),
            };
            write_artifact(out_dir, "ldp.csv", &ldp_to_csv(&estimate))?;
            let body = serde_json::json!({
                "schema": "mfgibbs-ldp-v1",
                "model": section.id(),
                "estimate": estimate,
            });
            write_artifact(
                out_dir,
                "ldp.json",
                &serde_json::to_string_pretty(&body).expect("serializable"),
            )?;
            artifacts.extend(["ldp.csv".to_string(), "ldp.json".to_string()]);
        }
    }
    Ok(artifacts)
}

fn run_tilting(config: &RunConfig, out_dir: &Path) -> Result<Vec<String>> {
    let (model, section) = config.model()?;
    let confining = config
        .confining
        .ok_or_else(|| Error::Config("missing [confining] section".into()))?;
    let report: TiltingReport = verify_tilting(&model, confining.eta, confining.ell)?;
    let body = serde_json::json!({
        "schema": "mfgibbs-tilting-v1",
        "model": section.id(),
        "report": report,
    });
    write_artifact(
        out_dir,
        "tilting.json",
        &serde_json::to_string_pretty(&body).expect("serializable"),
    )?;
    Ok(vec!["tilting.json".into()])
}

fn run_capital_curve(config: &RunConfig, out_dir: &Path) -> Result<Vec<String>> {
    let section = config
        .capital_curve
        .as_ref()
        .ok_or_else(|| Error::Config("missing [capital_curve] section".into()))?;
    let curve = if let Some(weights_path) = &section.weights_csv {
        let weights = weights_from_csv(&fs::read_to_string(weights_path)?)?;
        capital_curve(&MarketState::from_weights(weights)?)?
    } else if let Some(samples_path) = &section.samples_csv {
        let sidecar_path = section.samples_sidecar.as_ref().ok_or_else(|| {
            Error::Config("samples input needs both samples_csv and samples_sidecar".into())
        })?;
        let set = crate::sampler::samples_from_files(
            &fs::read_to_string(samples_path)?,
            &fs::read_to_string(sidecar_path)?,
        )?;
        empirical_typical_curve(&set)?
    } else if let Some(n) = section.n {
        let (model, _) = config.model()?;
        let density = stationary_density(config, &model)?;
        typical_curve_from_density(&density, n)?
    } else {
        return Err(Error::Config(
            "capital_curve needs one of: n, samples_csv, weights_csv".into(),
        ));
    };
    write_artifact(out_dir, "capital-curve.csv", &curve_to_csv(&curve))?;
    Ok(vec!["capital-curve.csv".into()])
}

fn run_metrics(config: &RunConfig, out_dir: &Path) -> Result<Vec<String>> {
    let section = config
        .metrics
        .as_ref()
        .ok_or_else(|| Error::Config("missing [metrics] section".into()))?;
    if section.inputs.len() < 2 {
        return Err(Error::Config(
            "metrics needs at least two input measure files".into(),
        ));
    }
    let mut measures = Vec::new();
    for path in &section.inputs {
        measures.push(measure_from_csv(&fs::read_to_string(path)?)?);
    }
    let mut out = format!("# {METRICS_FORMAT_VERSION} i,j,file_i,file_j,distance\n");
    for i in 0..measures.len() {
        for j in i + 1..measures.len() {
            let d = match (section.base, section.quotient) {
                (MetricBaseName::Prohorov, false) => prohorov_1d(&measures[i], &measures[j])?,
                (MetricBaseName::Wasserstein, false) => {
                    wasserstein_1d(&measures[i], &measures[j], section.p)?
                }
                (MetricBaseName::Prohorov, true) => {
                    quotient_distance(&measures[i], &measures[j], QuotientBase::Prohorov)?
                }
                (MetricBaseName::Wasserstein, true) => quotient_distance(
                    &measures[i],
                    &measures[j],
                    QuotientBase::Wasserstein { p: section.p },
                )?,
            };
            out.push_str(&format!(
                "{},{},{},{},{:?}\n",
                i, j, section.inputs[i], section.inputs[j], d
            ));
        }
    }
    write_artifact(out_dir, "metrics.csv", &out)?;
    Ok(vec!["metrics.csv".into()])
}

/// One row of a metrics table: `(i, j, file_i, file_j, distance)`.
pub type MetricsRow = (usize, usize, String, String, f64);

pub fn metrics_from_csv(text: &str) -> Result<Vec<MetricsRow>> {
    let mut rows = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            return Err(Error::Config("metrics CSV row needs 5 columns".into()));
        }
        rows.push((
            cols[0]
                .parse()
                .map_err(|e| Error::Config(format!("bad index: {e}")))?,
            cols[1]
                .parse()
                .map_err(|e| Error::Config(format!("bad index: {e}")))?,
            cols[2].to_string(),
            cols[3].to_string(),
            cols[4]
                .parse()
                .map_err(|e| Error::Config(format!("bad distance: {e}")))?,
        ));
    }
    Ok(rows)
}
