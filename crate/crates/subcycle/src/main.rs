use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use subcycle::compare::{compare, load_bundles, Status};
use subcycle::{scenario, AppError, AppResult, ExperimentConfig, Scenario};

/// Subcycle tomography of pulsed quantum light.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    /// Worker threads for delay sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its bundle.
    Run {
        /// JSON config; fields not given take the scenario preset.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Scenario preset to run when no config is given.
        #[arg(long)]
        scenario: Option<String>,
        /// Output directory (default: out/<scenario>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check a bundle, or a directory of bundles, against the reference table.
    Compare {
        bundle: PathBuf,
        /// Directory for report.json (default: the bundle directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the available scenarios.
    ListScenarios,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} worker threads: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Run { config, scenario, out, seed } => run(config.as_deref(), scenario.as_deref(), out, seed),
        Command::Compare { bundle, out } => run_compare(&bundle, out),
        Command::ListScenarios => {
            for s in Scenario::ALL {
                println!("{:<14} {}", s.name(), s.description());
            }
            Ok(0)
        }
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &AppError) -> u8 {
    match e {
        AppError::ConfigInvalid(_) => 2,
        AppError::MissingArtifact(_) | AppError::MalformedArtifact { .. } => 3,
        _ => 1,
    }
}

fn run(config: Option<&Path>, scenario: Option<&str>, out: Option<PathBuf>, seed: Option<u64>) -> AppResult<u8> {
    let mut cfg = match (config, scenario) {
        (Some(p), None) => ExperimentConfig::load(p)?,
        (None, Some(s)) => ExperimentConfig::preset(
            Scenario::parse(s).ok_or_else(|| AppError::config("scenario", format!("unknown scenario `{s}`")))?,
        ),
        (Some(_), Some(_)) => return Err(AppError::config("scenario", "give either --config or --scenario")),
        (None, None) => return Err(AppError::config("config", "one of --config or --scenario is required")),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    let out = out.unwrap_or_else(|| PathBuf::from("out").join(cfg.scenario.name()));
    let bundle = scenario::run(&cfg)?;
    bundle.write_to(&out)?;
    println!("wrote {} files to {}", bundle.files.len(), out.display());
    Ok(0)
}

fn run_compare(dir: &Path, out: Option<PathBuf>) -> AppResult<u8> {
    let bundles = load_bundles(dir)?;
    let report = compare(&bundles);
    let out = out.unwrap_or_else(|| dir.to_path_buf());
    std::fs::create_dir_all(&out).map_err(|e| AppError::io(&out, e))?;
    let path = out.join("report.json");
    std::fs::write(&path, report.to_json()).map_err(|e| AppError::io(&path, e))?;
    for c in &report.criteria {
        let verdict = match c.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Incomplete => "INCOMPLETE",
            Status::NotEvaluated => "n/a",
        };
        println!("criterion {}: {verdict:<10} {}", c.id, c.name);
    }
    println!("report written to {}", path.display());
    Ok(if report.passed { 0 } else { 3 })
}
