use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use rde_lab::{list_checks, run, Command, LabError, RunConfig, EXIT_ERROR};

/// Verification suites for diffusions in a drifted Brownian potential.
#[derive(Parser, Debug)]
#[command(name = "rde-lab", version)]
struct Cli {
    /// Which group of checks to run.
    #[arg(value_enum)]
    command: Command,
    /// Flat `key = value` configuration file; flags below take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory; falls back to `$RDE_LAB_OUT`, then `./rde-lab-out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated check names.
    #[arg(long, value_delimiter = ',')]
    suite: Option<Vec<String>>,
    /// Step overrides as `name=value`, repeatable.
    #[arg(long = "dt", value_name = "NAME=VALUE")]
    dt: Vec<String>,
    /// Radii for the tail checks, comma-separated.
    #[arg(long = "r-grid", value_delimiter = ',')]
    r_grid: Option<Vec<f64>>,
    /// Print the registry and exit.
    #[arg(long)]
    list: bool,
}

fn config(cli: &Cli) -> Result<RunConfig, LabError> {
    let mut cfg = RunConfig::new(cli.command);
    if let Some(p) = &cli.config {
        cfg.load_file(p)?;
        cfg.command = cli.command;
    }
    if let Some(v) = cli.kappa {
        cfg.kappa = Some(v);
    }
    if let Some(v) = cli.seed {
        cfg.seed = v;
    }
    if let Some(v) = cli.replicas {
        cfg.replicas = Some(v);
    }
    if let Some(v) = cli.workers {
        cfg.workers = v;
    }
    if let Some(v) = &cli.out {
        cfg.output_dir = Some(v.clone());
    }
    if let Some(v) = &cli.suite {
        cfg.suite = v.clone();
    }
    if let Some(v) = &cli.r_grid {
        cfg.r_grid = Some(v.clone());
    }
    for kv in &cli.dt {
        let (k, v) =
            kv.split_once('=').ok_or_else(|| LabError::Config(format!("--dt expects NAME=VALUE, got `{kv}`")))?;
        cfg.set(&format!("dt.{}", k.trim()), v.trim())?;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list {
        for (name, anchor, group) in list_checks() {
            println!("{name:<18} {:<7} {anchor}", group.as_str());
        }
        return ExitCode::SUCCESS;
    }
    let result = config(&cli).and_then(|cfg| run(&cfg));
    match result {
        Ok(report) => {
            for c in &report.checks {
                println!(
                    "{:<18} {:<4} statistic={} threshold={} n={}",
                    c.name,
                    c.verdict.as_str(),
                    c.statistic,
                    c.threshold,
                    c.n
                );
            }
            println!("overall: {}", report.overall.as_str());
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("rde-lab: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
