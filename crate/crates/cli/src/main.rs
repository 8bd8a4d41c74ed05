//! `fqns`: command-line workbench for sequential weak-measurement spectroscopy.

mod commands;
mod config;
mod error;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::CliError;

#[derive(Parser)]
#[command(name = "fqns", version, about = "Weak-measurement nonlinear spectroscopy workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration, or a manifest.json from an earlier run to replay it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for the Monte Carlo
    #[arg(long, global = true, env = "FQNS_THREADS")]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy, Debug)]
enum Command {
    /// Correlations and G^(K) from the exact evaluators
    Exact,
    /// Photon-counting Monte Carlo with exact predictions alongside
    Simulate,
    /// Material signal-to-noise estimates
    Snr,
    /// Repeat a command over a grid of one config parameter
    Sweep,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Exact => "exact",
            Command::Simulate => "simulate",
            Command::Snr => "snr",
            Command::Sweep => "sweep",
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config_path = cli.config.ok_or_else(|| CliError::Config("--config is required".into()))?;
    let out_dir = cli.out.ok_or_else(|| CliError::Config("--out is required".into()))?;
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let source = manifest::load_source(&config_path)?;
    let (cfg, table) = config::parse(&source.text)?;
    let base_dir: &Path = &source.base_dir;
    let started = manifest::unix_now();
    let output = match cli.command {
        Command::Exact => commands::exact(&cfg)?,
        Command::Simulate => commands::simulate(&cfg)?,
        Command::Snr => commands::snr(&cfg, base_dir)?,
        Command::Sweep => commands::sweep(&cfg, &table, base_dir)?,
    };
    for w in &output.warnings {
        eprintln!("warning: {w}");
    }
    std::fs::create_dir_all(&out_dir)?;
    let name = cli.command.name();
    let csv_path = out_dir.join(format!("{name}.csv"));
    let mut writer = csv::Writer::from_path(&csv_path)?;
    writer.write_record(commands::HEADER)?;
    for row in &output.rows {
        writer.write_record(row.record())?;
    }
    writer.flush()?;
    drop(writer);
    let m = manifest::Manifest::new(name, &source, cfg.seed, started, &csv_path, &output)?;
    std::fs::write(out_dir.join(format!("{name}.manifest.json")), serde_json::to_string_pretty(&m)?)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
