//! Command-line driver for the error-model experiment pipeline.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use errmodel::pipeline::{self, ExperimentConfig, ExperimentPlan};
use errmodel::Result;

#[derive(Parser)]
#[command(
    name = "errmodel",
    about = "Machine-learning error models for approximate solutions of \
             parameterized nonlinear systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for datasets, metrics, and reports.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads (0 = one per logical CPU).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    /// Replace the config's master seed.
    #[arg(long, global = true)]
    seed_override: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate (or load from cache) the labeled datasets.
    Generate,
    /// Run the sweep: selection, fitting, metrics, artifacts.
    Train,
    /// Replay saved models on the second test set.
    Predict,
    /// Full matrix: generate, train, and report.
    Sweep,
    /// Summaries and the q-vs-k comparison from existing metrics.
    Report,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Generate => "generate",
            Command::Train => "train",
            Command::Predict => "predict",
            Command::Sweep => "sweep",
            Command::Report => "report",
        }
    }
}

fn load_plan(cli: &Cli) -> Result<ExperimentPlan> {
    let path = cli.config.as_ref().ok_or_else(|| {
        errmodel::Error::Config("--config <path> is required for this command".into())
    })?;
    let mut config = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed_override {
        config.seed = seed;
    }
    config.plan()
}

fn out_dir(cli: &Cli) -> Result<PathBuf> {
    cli.out
        .clone()
        .ok_or_else(|| errmodel::Error::Config("--out <dir> is required".into()))
}

fn run(cli: &Cli) -> Result<String> {
    if cli.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.workers)
            .build_global()
            .map_err(|e| errmodel::Error::Config(format!("worker pool: {e}")))?;
    }
    let out = out_dir(cli)?;
    match cli.command {
        Command::Generate => {
            let plan = load_plan(cli)?;
            let data = pipeline::generate_datasets(&plan, &out)?;
            Ok(format!(
                "generated datasets: {} train rows, {} test rows, {} second-test rows \
                 ({} fresh high-fidelity solves, {} cache hits)",
                data.train.rows.len(),
                data.test.rows.len(),
                data.second.rows.len(),
                data.hf_solves_performed,
                data.cache_hits
            ))
        }
        Command::Train => {
            let plan = load_plan(cli)?;
            let summary = pipeline::run_experiment(&plan, &out)?;
            Ok(format!(
                "trained {} rows ({} failed; {} fresh high-fidelity solves, {} cell cache hits)",
                summary.rows_emitted,
                summary.failed_rows,
                summary.hf_solves_performed,
                summary.cell_cache_hits
            ))
        }
        Command::Predict => {
            let plan = load_plan(cli)?;
            let n = pipeline::predict_all(&plan, &out)?;
            Ok(format!("wrote predictions for {n} models"))
        }
        Command::Sweep => {
            let plan = load_plan(cli)?;
            let summary = pipeline::run_experiment(&plan, &out)?;
            let report = pipeline::emit_report(&out)?;
            Ok(format!(
                "sweep complete: {} rows ({} failed), {} q-vs-k pairs, \
                 q-better fraction {:.4}",
                summary.rows_emitted,
                summary.failed_rows,
                report.qk_pairs,
                report.fraction_q_better
            ))
        }
        Command::Report => {
            let report = pipeline::emit_report(&out)?;
            Ok(format!(
                "report written: {} rows ({} failed), {} scatter files checked",
                report.rows, report.failed_rows, report.scatter_checked
            ))
        }
    }
}

#[derive(serde::Serialize)]
struct FailureManifest<'a> {
    command: &'a str,
    error: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(message) => {
            println!("{message}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            let manifest = FailureManifest {
                command: cli.command.name(),
                error: e.to_string(),
            };
            let path = cli
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from("."))
                .join("failure.json");
            if let Some(parent) = path.parent() {
                let _ = std::fs::create_dir_all(parent);
            }
            if let Ok(text) = serde_json::to_string_pretty(&manifest) {
                let _ = std::fs::write(&path, text + "\n");
            }
            ExitCode::FAILURE
        }
    }
}
