use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use nlkg_lab::{run, Experiment, ExperimentConfig, RunError};

/// Runs one named experiment of the radial NLKG lab.
#[derive(Debug, Parser)]
#[command(name = "nlkg", version)]
struct Cli {
    /// ground-state, evolve, stability, instability, scaling-law, identities, inequalities or section4.
    experiment: Experiment,
    /// JSON configuration file; its keys override the built-in defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for report.json, trajectories and ground-state archives.
    #[arg(long)]
    out: Option<PathBuf>,
    /// key=value overrides applied last, e.g. grid.n=2048 or params.0.omega=omega_c.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    print_config: bool,
    /// Number of worker threads (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn execute(cli: &Cli) -> Result<bool, RunError> {
    let mut cfg = ExperimentConfig::load(cli.experiment, cli.config.as_deref())?;
    for o in &cli.overrides {
        cfg.apply_override(o)?;
    }
    if let Some(out) = &cli.out {
        cfg.out = Some(out.clone());
    }
    if cli.print_config {
        println!("{}", serde_json::to_string_pretty(&cfg).map_err(|e| RunError::Lab(e.into()))?);
        return Ok(true);
    }
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| RunError::Config(nlkg_lab::ConfigError(e.to_string())))?;
    }
    let report = run(&cfg)?;
    print!("{}", report.table());
    Ok(report.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("nlkg: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
