//! `complab` — completeness and essential self-adjointness lab for
//! degenerate Sturm–Liouville operators on the circle and Lorentzian
//! model surfaces.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numeric failure.

mod config;
mod logger;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::config::{load_config, resolve, CliResult, Overrides};
use crate::logger::log_error;

#[derive(Parser)]
#[command(
    name = "complab",
    version,
    about = "Classifies degenerate Sturm-Liouville operators on the circle as classically \
             complete / essentially self-adjoint, and verifies the verdicts numerically."
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct JobArgs {
    /// Path to the JSON job configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: the config's `out`, else the current directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Integration horizon override.
    #[arg(long)]
    t_max: Option<f64>,
    /// Covector / growth cap override.
    #[arg(long)]
    xi_cap: Option<f64>,
    /// Series truncation order override.
    #[arg(long)]
    series_order: Option<usize>,
    /// Probe RNG seed override.
    #[arg(long)]
    seed: Option<u64>,
}

impl JobArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            out: self.out.clone(),
            t_max: self.t_max,
            xi_cap: self.xi_cap,
            series_order: self.series_order,
            seed: self.seed,
        }
    }
}

#[derive(Args)]
struct GalleryArgs {
    /// Directory receiving the nine example configs.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Cmd {
    /// Symbolic classification; writes report.json.
    Classify(JobArgs),
    /// Hamiltonian-flow completeness probe; writes flow.json and trajectory CSVs.
    Flow(JobArgs),
    /// Local solution bases at every zero; writes series/*.json.
    Frobenius(JobArgs),
    /// L2 deficiency-index estimate; writes deficiency.json.
    Deficiency(JobArgs),
    /// Surface-model pipeline: geodesics, mode identity, verdict.
    Lorentz(JobArgs),
    /// Write the nine built-in example configs.
    Gallery(GalleryArgs),
    /// Run all pipelines and report their agreement.
    Crosscheck(JobArgs),
}

fn job(args: &JobArgs, f: impl FnOnce(&config::JobConfig, &config::Resolved) -> CliResult<()>) -> CliResult<()> {
    let cfg = load_config(&args.config)?;
    let res = resolve(&cfg, &args.overrides())?;
    let outcome = f(&cfg, &res);
    if let Err(failure) = &outcome {
        // Structured error record next to the (partial) outputs.
        let record = json!({
            "errors": [{ "stage": failure.stage(), "message": failure.message() }]
        });
        if let Ok(mut text) = serde_json::to_string_pretty(&record) {
            text.push('\n');
            if std::fs::create_dir_all(&res.out).is_ok() {
                let _ = std::fs::write(res.out.join("errors.json"), text);
            }
        }
    }
    outcome
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match &cli.cmd {
        Cmd::Classify(a) => job(a, run::run_classify),
        Cmd::Flow(a) => job(a, run::run_flow),
        Cmd::Frobenius(a) => job(a, run::run_frobenius),
        Cmd::Deficiency(a) => job(a, run::run_deficiency),
        Cmd::Lorentz(a) => job(a, run::run_lorentz),
        Cmd::Crosscheck(a) => job(a, run::run_crosscheck),
        Cmd::Gallery(a) => run::run_gallery(&a.out).map(|_| ()),
    }
}

fn main() -> ExitCode {
    logger::init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            log_error!("{}: {}", failure.stage(), failure.message());
            ExitCode::from(failure.exit_code())
        }
    }
}
