//! Run configuration: a TOML file with one section per concern. Unknown
//! keys are rejected, and every section is validated before any computation
//! starts.

use crate::densities::{default_grid, GridSpec, MinimizeOptions, StationaryOptions};
use crate::error::{Error, Result};
use crate::ldp::{CurveConfig, EventSpec};
use crate::models::{Model, MvModel, RbModel};
use crate::sampler::{default_step, Algorithm, SamplerConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// One of the named built-ins (`mv:quadratic`, `mv:cubic`, `mv:abs`,
    /// `rb:logistic-flux`); exclusive with the custom fields below.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    /// Custom pairwise potential: `(power, coefficient)` pairs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mv_terms: Option<Vec<(f64, f64)>>,
    /// Custom flux polynomial coefficients on the monomial basis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rb_coefficients: Option<Vec<f64>>,
    pub sigma_sq: f64,
}

impl ModelSection {
    pub fn build(&self) -> Result<Model> {
        let picked = [
            self.builtin.is_some(),
            self.mv_terms.is_some(),
            self.rb_coefficients.is_some(),
        ]
        .iter()
        .filter(|&&b| b)
        .count();
        if picked != 1 {
            return Err(Error::Config(
                "model section needs exactly one of: builtin, mv_terms, rb_coefficients".into(),
            ));
        }
        if let Some(name) = &self.builtin {
            return Model::builtin(name, self.sigma_sq);
        }
        if let Some(terms) = &self.mv_terms {
            return Ok(Model::Mv(MvModel::new(terms.clone(), self.sigma_sq)?));
        }
        Ok(Model::Rb(RbModel::new(
            self.rb_coefficients.clone().expect("checked"),
            self.sigma_sq,
        )?))
    }

    pub fn id(&self) -> String {
        if let Some(name) = &self.builtin {
            format!("{name} sigma_sq={}", self.sigma_sq)
        } else if let Some(terms) = &self.mv_terms {
            format!("mv:custom{terms:?} sigma_sq={}", self.sigma_sq)
        } else {
            format!(
                "rb:custom{:?} sigma_sq={}",
                self.rb_coefficients.as_deref().unwrap_or(&[]),
                self.sigma_sq
            )
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSection {
    pub n: usize,
    #[serde(default = "default_d")]
    pub d: usize,
    /// Proposal step; computed from the model family when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    pub burn_in: u64,
    #[serde(default = "default_thin")]
    pub thin: u64,
    pub total_samples: u64,
    pub algorithm: Algorithm,
    pub seed: u64,
}

fn default_d() -> usize {
    1
}

fn default_thin() -> u64 {
    1
}

impl SamplerSection {
    pub fn build(&self, model: &Model) -> Result<SamplerConfig> {
        let cfg = SamplerConfig {
            n: self.n,
            d: self.d,
            step: self.step.unwrap_or_else(|| default_step(model, self.n)),
            burn_in: self.burn_in,
            thin: self.thin,
            total_samples: self.total_samples,
            algorithm: self.algorithm,
            seed: self.seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub a: f64,
    pub b: f64,
    pub m: usize,
}

impl GridSection {
    pub fn build(&self) -> Result<GridSpec> {
        GridSpec::new(self.a, self.b, self.m)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LdpSection {
    pub n_list: Vec<usize>,
    pub chains_per_n: u64,
    pub burn_in: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    pub seed: u64,
    #[serde(default)]
    pub threads: usize,
    pub event: EventSection,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventSection {
    pub kind: EventKindName,
    pub threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKindName {
    VarthetaAtLeast,
    W1ToStationaryAtLeast,
    MeanAbsAtLeast,
}

impl EventSection {
    pub fn build(&self) -> Result<EventSpec> {
        Ok(match self.kind {
            EventKindName::MeanAbsAtLeast => EventSpec::MeanAbsAtLeast {
                threshold: self.threshold,
            },
            EventKindName::W1ToStationaryAtLeast => EventSpec::W1ToStationaryAtLeast {
                threshold: self.threshold,
            },
            EventKindName::VarthetaAtLeast => EventSpec::VarthetaAtLeast {
                ell: self.ell.ok_or_else(|| {
                    Error::Config("vartheta events need the `ell` key".into())
                })?,
                threshold: self.threshold,
            },
        })
    }
}

impl LdpSection {
    pub fn curve_config(&self) -> CurveConfig {
        CurveConfig {
            chains_per_n: self.chains_per_n,
            burn_in: self.burn_in,
            step: self.step,
            seed: self.seed,
            threads: self.threads,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationarySection {
    #[serde(default = "default_omega")]
    pub omega: f64,
    #[serde(default = "default_fp_tol")]
    pub tol: f64,
    #[serde(default = "default_fp_iter")]
    pub max_iter: u64,
}

fn default_omega() -> f64 {
    0.5
}
fn default_fp_tol() -> f64 {
    1e-10
}
fn default_fp_iter() -> u64 {
    10_000
}

impl Default for StationarySection {
    fn default() -> Self {
        Self {
            omega: default_omega(),
            tol: default_fp_tol(),
            max_iter: default_fp_iter(),
        }
    }
}

impl StationarySection {
    pub fn build(&self) -> StationaryOptions {
        StationaryOptions {
            omega: self.omega,
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfiningSection {
    pub eta: f64,
    pub ell: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSection {
    #[serde(default = "default_check_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_check_samples() -> usize {
    200
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateSection {
    /// Density CSV to evaluate; the stationary/minimizing density itself
    /// when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density_csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density_sidecar: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsSection {
    pub inputs: Vec<String>,
    pub base: MetricBaseName,
    #[serde(default = "default_order")]
    pub p: f64,
    #[serde(default)]
    pub quotient: bool,
}

fn default_order() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricBaseName {
    Prohorov,
    Wasserstein,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapitalCurveSection {
    /// Number of stocks for the typical curve.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Samples CSV (+ sidecar) to average a curve from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples_csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples_sidecar: Option<String>,
    /// Externally supplied weights CSV (plot ingestion only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights_csv: Option<String>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinimizeSection {
    #[serde(default = "default_min_step")]
    pub initial_step: f64,
    #[serde(default = "default_min_tol")]
    pub tol: f64,
    #[serde(default = "default_min_iter")]
    pub max_iter: u64,
}

fn default_min_step() -> f64 {
    0.5
}
fn default_min_tol() -> f64 {
    1e-6
}
fn default_min_iter() -> u64 {
    200_000
}

impl Default for MinimizeSection {
    fn default() -> Self {
        Self {
            initial_step: default_min_step(),
            tol: default_min_tol(),
            max_iter: default_min_iter(),
        }
    }
}

impl MinimizeSection {
    pub fn build(&self) -> MinimizeOptions {
        MinimizeOptions {
            initial_step: self.initial_step,
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }
}

/// The full run configuration. Sections are optional; each subcommand
/// validates that the sections it needs are present.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampler: Option<SamplerSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ldp: Option<LdpSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stationary: Option<StationarySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confining: Option<ConfiningSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<CheckSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<RateSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capital_curve: Option<CapitalCurveSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minimize: Option<MinimizeSection>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("config parse error: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("serializable")
    }

    pub fn model(&self) -> Result<(Model, &ModelSection)> {
        let section = self
            .model
            .as_ref()
            .ok_or_else(|| Error::Config("missing [model] section".into()))?;
        Ok((section.build()?, section))
    }

    /// Grid for density work: the explicit section, or the temperature's
    /// default.
    pub fn grid_for(&self, sigma_sq: f64) -> Result<GridSpec> {
        match &self.grid {
            Some(g) => g.build(),
            None => Ok(default_grid(sigma_sq)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_config() {
        let text = r#"
[model]
builtin = "rb:logistic-flux"
sigma_sq = 2.0

[sampler]
n = 8
burn_in = 100
total_samples = 50
algorithm = "mala"
seed = 7

[grid]
a = -40.0
b = 40.0
m = 16000

[ldp]
n_list = [8, 16]
chains_per_n = 100
burn_in = 200
seed = 3
[ldp.event]
kind = "mean_abs_at_least"
threshold = 1.8
"#;
        let cfg = RunConfig::from_toml(text).unwrap();
        let (model, section) = cfg.model().unwrap();
        assert_eq!(model.sigma_sq(), 2.0);
        assert!(section.id().contains("rb:logistic-flux"));
        let scfg = cfg.sampler.as_ref().unwrap().build(&model).unwrap();
        assert_eq!(scfg.thin, 1);
        assert!(scfg.step > 0.0);
        let event = cfg.ldp.as_ref().unwrap().event.build().unwrap();
        assert_eq!(event.threshold(), 1.8);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = "[model]\nbuiltin = \"mv:quadratic\"\nsigma_sq = 2.0\nbogus = 1\n";
        assert!(RunConfig::from_toml(text).is_err());
        let text = "[nonsense]\nx = 1\n";
        assert!(RunConfig::from_toml(text).is_err());
    }

    #[test]
    fn model_section_needs_exactly_one_source() {
        let none = ModelSection {
            builtin: None,
            mv_terms: None,
            rb_coefficients: None,
            sigma_sq: 2.0,
        };
        assert!(none.build().is_err());
        let both = ModelSection {
            builtin: Some("mv:abs".into()),
            mv_terms: Some(vec![(1.0, 1.0)]),
            rb_coefficients: None,
            sigma_sq: 2.0,
        };
        assert!(both.build().is_err());
    }

    #[test]
    fn custom_models_build() {
        let mv = ModelSection {
            builtin: None,
            mv_terms: Some(vec![(2.0, 1.0), (1.0, 0.3)]),
            rb_coefficients: None,
            sigma_sq: 1.5,
        };
        assert!(matches!(mv.build().unwrap(), Model::Mv(_)));
        let rb = ModelSection {
            builtin: None,
            mv_terms: None,
            rb_coefficients: Some(vec![0.0, 1.0, -1.0]),
            sigma_sq: 1.5,
        };
        assert!(matches!(rb.build().unwrap(), Model::Rb(_)));
    }

    #[test]
    fn vartheta_event_requires_order() {
        let e = EventSection {
            kind: EventKindName::VarthetaAtLeast,
            threshold: 2.0,
            ell: None,
        };
        assert!(e.build().is_err());
    }

    #[test]
    fn config_round_trips_through_toml() {
        let text = "[model]\nbuiltin = \"mv:quadratic\"\nsigma_sq = 2.0\n";
        let cfg = RunConfig::from_toml(text).unwrap();
        let again = RunConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(cfg.to_toml(), again.to_toml());
    }
}
