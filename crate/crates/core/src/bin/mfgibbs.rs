use clap::{Args, Parser, Subcommand};
use mfgibbs::cli::{execute, exit_code_for, rerun, CommandName};
use mfgibbs::config::{MetricBaseName, MetricsSection, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

/// Equilibrium Gibbs sampling, free-energy rate functions and
/// large-deviation diagnostics for translation-invariant mean-field particle
/// systems.
#[derive(Parser)]
#[command(name = "mfgibbs", version, about)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override every seed in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Cap the worker threads of the estimation harness.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output directory (default: $MFGIBBS_OUT_DIR or the working
    /// directory).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the structural assumptions of the configured model.
    CheckModel,
    /// Sample the centered equilibrium law.
    Sample(SampleArgs),
    /// Solve for the stationary (or free-energy-minimizing) density.
    Stationary,
    /// Evaluate free energy and rate for a density.
    Rate(RateArgs),
    /// Estimate event-probability slopes across system sizes.
    Ldp(LdpArgs),
    /// Verify the two-particle exponential-tilting identity by quadrature.
    Tilting(TiltingArgs),
    /// Emit a capital distribution curve.
    CapitalCurve(CapitalCurveArgs),
    /// Pairwise distance table for empirical-measure files.
    Metrics(MetricsArgs),
    /// Re-execute a run from its manifest (bit-exact on the same build).
    Rerun(RerunArgs),
}

#[derive(Args)]
struct SampleArgs {
    /// Override the particle count.
    #[arg(long)]
    n: Option<usize>,
    /// Override the number of kept samples.
    #[arg(long)]
    total_samples: Option<u64>,
}

#[derive(Args)]
struct RateArgs {
    /// Density CSV to evaluate (defaults to the stationary density).
    #[arg(long)]
    density: Option<String>,
    /// Sidecar JSON of the density.
    #[arg(long)]
    sidecar: Option<String>,
}

#[derive(Args)]
struct LdpArgs {
    /// Override the chain budget per system size.
    #[arg(long)]
    chains: Option<u64>,
    /// Override the system sizes (comma separated).
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
}

#[derive(Args)]
struct TiltingArgs {
    /// Override the confinement strength.
    #[arg(long)]
    eta: Option<f64>,
    /// Override the confinement order.
    #[arg(long)]
    ell: Option<f64>,
}

#[derive(Args)]
struct CapitalCurveArgs {
    /// Number of stocks for the typical curve.
    #[arg(long)]
    n: Option<usize>,
    /// Weights CSV to plot instead of the typical curve.
    #[arg(long)]
    weights: Option<String>,
}

#[derive(Args)]
struct MetricsArgs {
    /// Measure CSV files (at least two); overrides the config inputs.
    inputs: Vec<String>,
    /// Base metric: prohorov or wasserstein.
    #[arg(long, default_value = "wasserstein")]
    base: String,
    /// Wasserstein order.
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    /// Take the infimum over relative translations.
    #[arg(long)]
    quotient: bool,
}

#[derive(Args)]
struct RerunArgs {
    /// Manifest of the run to reproduce.
    manifest: PathBuf,
}

fn load_config(cli: &Cli) -> Result<RunConfig, mfgibbs::Error> {
    match &cli.config {
        Some(path) => RunConfig::from_toml(&std::fs::read_to_string(path)?),
        None => Ok(RunConfig::default()),
    }
}

fn apply_overrides(cli: &Cli, config: &mut RunConfig) {
    if let Some(seed) = cli.seed {
        if let Some(s) = config.sampler.as_mut() {
            s.seed = seed;
        }
        if let Some(l) = config.ldp.as_mut() {
            l.seed = seed;
        }
        if let Some(c) = config.check.as_mut() {
            c.seed = seed;
        }
    }
    if let Some(threads) = cli.threads {
        if let Some(l) = config.ldp.as_mut() {
            l.threads = threads;
        }
    }
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out_dir
        .clone()
        .or_else(|| std::env::var_os("MFGIBBS_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn run(cli: &Cli) -> Result<Vec<String>, mfgibbs::Error> {
    let dir = out_dir(cli);
    if let Command::Rerun(args) = &cli.command {
        return rerun(&args.manifest, &dir);
    }
    let mut config = load_config(cli)?;
    apply_overrides(cli, &mut config);
    let name = match &cli.command {
        Command::CheckModel => CommandName::CheckModel,
        Command::Sample(args) => {
            if let Some(s) = config.sampler.as_mut() {
                if let Some(n) = args.n {
                    s.n = n;
                }
                if let Some(t) = args.total_samples {
                    s.total_samples = t;
                }
            }
            CommandName::Sample
        }
        Command::Stationary => CommandName::Stationary,
        Command::Rate(args) => {
            if args.density.is_some() || args.sidecar.is_some() {
                config.rate = Some(mfgibbs::config::RateSection {
                    density_csv: args.density.clone(),
                    density_sidecar: args.sidecar.clone(),
                });
            }
            CommandName::Rate
        }
        Command::Ldp(args) => {
            if let Some(l) = config.ldp.as_mut() {
                if let Some(chains) = args.chains {
                    l.chains_per_n = chains;
                }
                if let Some(ns) = &args.n_list {
                    l.n_list = ns.clone();
                }
            }
            CommandName::Ldp
        }
        Command::Tilting(args) => {
            if let Some(c) = config.confining.as_mut() {
                if let Some(eta) = args.eta {
                    c.eta = eta;
                }
                if let Some(ell) = args.ell {
                    c.ell = ell;
                }
            }
            CommandName::Tilting
        }
        Command::CapitalCurve(args) => {
            if args.n.is_some() || args.weights.is_some() {
                let mut section = config.capital_curve.clone().unwrap_or(
                    mfgibbs::config::CapitalCurveSection {
                        n: None,
                        samples_csv: None,
                        samples_sidecar: None,
                        weights_csv: None,
                    },
                );
                if let Some(n) = args.n {
                    section.n = Some(n);
                }
                if let Some(w) = &args.weights {
                    section.weights_csv = Some(w.clone());
                }
                config.capital_curve = Some(section);
            }
            CommandName::CapitalCurve
        }
        Command::Metrics(args) => {
            if !args.inputs.is_empty() {
                let base = match args.base.as_str() {
                    "prohorov" => MetricBaseName::Prohorov,
                    "wasserstein" => MetricBaseName::Wasserstein,
                    other => {
                        return Err(mfgibbs::Error::Config(format!(
                            "unknown base metric {other:?}"
                        )))
                    }
                };
                config.metrics = Some(MetricsSection {
                    inputs: args.inputs.clone(),
                    base,
                    p: args.p,
                    quotient: args.quotient,
                });
            }
            CommandName::Metrics
        }
        Command::Rerun(_) => unreachable!("handled above"),
    };
    execute(name, &config, &dir)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(artifacts) => {
            for a in &artifacts {
                println!("wrote {}", out_dir(&cli).join(a).display());
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err) as u8)
        }
    }
}
