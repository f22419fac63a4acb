use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use nmg_core::{load_fleet, FleetSpec, Mode, ScheduleError};

mod commands;
mod output;

#[derive(Debug, Parser)]
#[command(name = "nmg", version, about = "Chance-constrained day-ahead scheduling of networked microgrids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one fleet, validate the schedule and write CSV reports.
    Solve(SolveArgs),
    /// Sweep the PSI requirement, solving networked and independent modes.
    SweepPsi(SweepPsiArgs),
    /// Sweep a uniform cross-microgrid correlation.
    SweepCorr(SweepCorrArgs),
    /// Export the scheduling MILP in fixed MPS format.
    ExportMps(ExportArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Fleet configuration (JSON).
    config: PathBuf,
    /// Relative MIP gap.
    #[arg(long, default_value_t = 0.001)]
    gap: f64,
    /// Solver time limit per solve, seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Base seed of the Monte Carlo sampler.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Omit the `# generated` header line from CSV files.
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,
    /// Override the configured mode.
    #[arg(long)]
    mode: Option<Mode>,
    /// Override the configured PSI requirement.
    #[arg(long)]
    psi_req: Option<f64>,
    /// Monte Carlo draws per period.
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
}

#[derive(Debug, Args)]
struct SweepPsiArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.5, 0.8, 0.9, 0.95, 0.99])]
    psi_grid: Vec<f64>,
    /// Sweep points solved concurrently.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
}

#[derive(Debug, Args)]
struct SweepCorrArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.25, 0.5, 0.75, 1.0])]
    rho_grid: Vec<f64>,
    /// Override the configured PSI requirement.
    #[arg(long)]
    psi_req: Option<f64>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
}

#[derive(Debug, Args)]
struct ExportArgs {
    config: PathBuf,
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long)]
    psi_req: Option<f64>,
    /// Output MPS path; a `.names.csv` sidecar is written next to it.
    #[arg(long, default_value = "model.mps")]
    out: PathBuf,
}

fn load(path: &PathBuf, mode: Option<Mode>, psi_req: Option<f64>) -> anyhow::Result<FleetSpec> {
    let mut fleet = load_fleet(path)?;
    if let Some(m) = mode {
        fleet.mode = m;
    }
    if let Some(q) = psi_req {
        fleet.psi_req = q;
        let violations = nmg_core::validate_fleet(&fleet);
        if !violations.is_empty() {
            return Err(nmg_core::ConfigError::Invalid(violations)).context("--psi-req");
        }
    }
    Ok(fleet)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Solve(a) => {
            let fleet = load(&a.common.config, a.mode, a.psi_req)?;
            commands::solve(&fleet, &a.common.settings(), a.samples)
        }
        Command::SweepPsi(a) => {
            let fleet = load(&a.common.config, None, None)?;
            commands::sweep_psi(&fleet, &a.common.settings(), &a.psi_grid, a.jobs, a.samples)
        }
        Command::SweepCorr(a) => {
            let fleet = load(&a.common.config, None, a.psi_req)?;
            commands::sweep_corr(&fleet, &a.common.settings(), &a.rho_grid, a.jobs, a.samples)
        }
        Command::ExportMps(a) => {
            let fleet = load(&a.config, a.mode, a.psi_req)?;
            commands::export_mps(&fleet, &a.out)
        }
    }
}

impl Common {
    fn settings(&self) -> commands::Settings {
        commands::Settings {
            gap: self.gap,
            time_limit: self.time_limit,
            out_dir: self.out_dir.clone(),
            seed: self.seed,
            timestamp: !self.no_timestamp,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let infeasible = e
                .chain()
                .any(|c| c.downcast_ref::<ScheduleError>().is_some_and(ScheduleError::is_infeasible));
            ExitCode::from(if infeasible { 2 } else { 1 })
        }
    }
}
