use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sdns_cli::{parse_config, run, Command};

#[derive(Parser)]
#[command(
    name = "sdns",
    version,
    about = "Stochastic Navier–Stokes on the unit disk"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override one configuration key, e.g. `--set sim.nu=0.01`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for the Brownian paths (same as `noise.seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// More log output; repeat for more.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Write the Stokes spectrum table.
    Spectrum,
    /// Run the invariant suite and report every defect.
    Validate,
    /// Integrate one trajectory (and an ensemble when ensemble.paths > 1).
    Simulate,
    /// Run the viscosity sweep on a shared path.
    Sweep,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let mut overrides = cli.overrides.clone();
    if let Some(seed) = cli.seed {
        overrides.push(format!("noise.seed=\"{seed}\""));
    }
    if let Some(out) = &cli.out {
        overrides.push(format!("output.dir={:?}", out.display().to_string()));
    }
    let command = match cli.command {
        Cmd::Spectrum => Command::Spectrum,
        Cmd::Validate => Command::Validate,
        Cmd::Simulate => Command::Simulate,
        Cmd::Sweep => Command::Sweep,
    };
    let result = parse_config(cli.config.as_deref(), &overrides).and_then(|cfg| run(command, &cfg));
    match result {
        Ok(outcome) => {
            if let Some(report) = &outcome.report {
                let _ = report.write(std::io::stdout().lock());
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
