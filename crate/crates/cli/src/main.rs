//! Scenario driver for the ensemble photon-pair simulation.

mod commands;
mod config;
mod data;
mod error;
mod output;
mod presets;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Scenario;
use config::ScenarioConfig;
use error::{CliError, CliResult};

#[derive(Parser)]
#[command(
    name = "pairsim",
    version,
    about = "Photon-pair generation from cold atomic ensembles: decoherence sweeps, \
             two-photon wavepackets, correlation statistics, and Raman spectra"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario file (TOML) or the name of a built-in preset.
    #[arg(long)]
    config: Option<String>,
    /// Output path; overrides the configured one.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Evaluation backend: analytic, numeric, or delta.
    #[arg(long)]
    backend: Option<String>,
    /// Seed for stochastic commands; overrides the configured one.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores). Outputs are identical for any
    /// value.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Joint-probability decay p12(delta_t); optionally scale-fit to data.
    Decoherence {
        #[command(flatten)]
        common: CommonArgs,
        /// Measured g12 data (columns delta_t_ns, g12, sigma) to fit xi.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Binned two-photon wavepacket density over detection-time pairs.
    Wavepacket {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Photon-number correlation functions and the Cauchy-Schwarz ratio.
    Correlations {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Ground-state Zeeman-broadened Raman spectrum.
    Raman {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Weighted scale fit of a theory curve against measured data.
    Fit {
        /// Theory curve CSV (columns delta_t_ns, p12).
        #[arg(long)]
        theory: PathBuf,
        /// Measured data (columns delta_t_ns, g12, sigma).
        #[arg(long)]
        data: PathBuf,
        /// Report output path.
        #[arg(long, default_value = "fit.json")]
        out: PathBuf,
    },
    /// List the built-in presets.
    Presets,
}

fn load_scenario(common: &CommonArgs) -> CliResult<Scenario> {
    let (text, source) = match &common.config {
        None => (String::new(), "defaults".to_string()),
        Some(spec) => {
            let path = PathBuf::from(spec);
            if path.exists() {
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
                (text, format!("file:{spec}"))
            } else if let Some(preset) = presets::find(spec) {
                (preset.toml.to_string(), format!("preset:{spec}"))
            } else {
                return Err(CliError::Config(format!(
                    "--config \"{spec}\" is neither a file nor a built-in preset \
                     (see `pairsim presets`)"
                )));
            }
        }
    };
    let cfg = if text.is_empty() {
        ScenarioConfig::default()
    } else {
        ScenarioConfig::parse(&text)?
    };
    let backend = cfg.backend_name(common.backend.as_deref())?;
    let out = common
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&cfg.output.out));
    Ok(Scenario {
        cfg,
        source,
        backend,
        out,
    })
}

fn with_pool<F: FnOnce() -> CliResult<()> + Send>(threads: Option<usize>, f: F) -> CliResult<()> {
    match threads {
        None => f(),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
            pool.install(f)
        }
    }
}

fn run() -> CliResult<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Decoherence { common, data } => {
            let scenario = load_scenario(&common)?;
            with_pool(common.threads, || {
                commands::run_decoherence(&scenario, data.as_deref())
            })
        }
        Command::Wavepacket { common } => {
            let scenario = load_scenario(&common)?;
            with_pool(common.threads, || commands::run_wavepacket(&scenario))
        }
        Command::Correlations { common } => {
            let scenario = load_scenario(&common)?;
            with_pool(common.threads, || {
                commands::run_correlations(&scenario, common.seed)
            })
        }
        Command::Raman { common } => {
            let scenario = load_scenario(&common)?;
            with_pool(common.threads, || commands::run_raman(&scenario))
        }
        Command::Fit { theory, data, out } => commands::run_fit(&theory, &data, &out),
        Command::Presets => {
            commands::run_presets();
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pairsim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
