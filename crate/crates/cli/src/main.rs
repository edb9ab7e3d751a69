mod commands;
mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

use config::{Command, ExperimentConfig, Overrides};

/// Verification suites and experiments for the long-range random-field Ising model.
#[derive(Parser, Debug)]
#[command(name = "lrfim", version)]
struct Cli {
    /// TOML config with [model], [window], [run] and [tail] sections.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; results go to <out>/<subcommand>/.
    #[arg(long, global = true)]
    out: Option<String>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Comma-separated list.
    #[arg(long, global = true, value_delimiter = ',')]
    alpha: Option<Vec<f64>>,
    /// Comma-separated list.
    #[arg(long, global = true, value_delimiter = ',')]
    beta: Option<Vec<f64>>,
    /// Comma-separated list.
    #[arg(long, global = true, value_delimiter = ',')]
    epsilon: Option<Vec<f64>>,
    /// Window side length in sites.
    #[arg(long, global = true)]
    window: Option<usize>,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Sub {
    /// Balancing, interaction, sequence, interval and entropy checks in 1D.
    #[command(name = "verify-1d")]
    Verify1d,
    /// Partition, cube, no-overlap, large-interaction and isoperimetric checks in 2D.
    #[command(name = "verify-2d")]
    Verify2d,
    /// Subgaussian tail of Delta_A - Delta_A' by exact enumeration.
    DeltaTail,
    /// Metropolis estimates of mu+(sigma_0 = -1) over an (alpha, beta, epsilon) grid.
    Simulate,
    /// Count small external contours around the origin.
    EnumerateContours,
    /// Recompute the calibrated constants.
    Calibrate,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Self {
        match s {
            Sub::Verify1d => Command::Verify1d,
            Sub::Verify2d => Command::Verify2d,
            Sub::DeltaTail => Command::DeltaTail,
            Sub::Simulate => Command::Simulate,
            Sub::EnumerateContours => Command::EnumerateContours,
            Sub::Calibrate => Command::Calibrate,
        }
    }
}

fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

fn execute(cli: &Cli) -> Result<bool> {
    let command: Command = cli.command.into();
    let text = match &cli.config {
        Some(p) => Some(fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?),
        None => None,
    };
    let overrides = Overrides {
        seed: cli.seed,
        out: cli.out.clone(),
        jobs: cli.jobs,
        alpha: cli.alpha.clone(),
        beta: cli.beta.clone(),
        epsilon: cli.epsilon.clone(),
        window: cli.window,
    };
    let cfg = ExperimentConfig::resolve(command, text.as_deref(), &overrides)?;
    if cfg.run.jobs > 0 {
        // Only fails if a pool already exists, in which case it is reused.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.run.jobs).build_global();
    }
    let dir = Path::new(&cfg.run.out).join(command.name());
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    fs::write(dir.join("resolved_config.toml"), toml::to_string(&cfg)?)?;

    let report = commands::run(&cfg)?;
    write_csv(&dir.join("data.csv"), &report.header, &report.rows)?;
    for (name, body) in &report.files {
        fs::write(dir.join(name), body)?;
    }
    let pass = report.pass();
    let summary = json!({
        "command": command.name(),
        "pass": pass,
        "checks": report.checks,
        "results": report.extra,
    });
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let meta = json!({ "command": command.name(), "unix_time": stamp, "version": env!("CARGO_PKG_VERSION") });
    fs::write(dir.join("metadata.json"), serde_json::to_string_pretty(&meta)? + "\n")?;

    for c in &report.checks {
        let tag = match (c.pass, c.hard) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "WARN",
        };
        println!("{tag} {}: {}", c.name, c.detail);
    }
    println!("{} -> {}", if pass { "ok" } else { "failed" }, dir.display());
    Ok(pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
