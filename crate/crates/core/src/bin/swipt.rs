//! Command-line front end over the `swipt_ac` library.
//!
//! Exit codes: 0 success, 1 validation failure, 2 configuration error,
//! 3 I/O failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use swipt_ac::config::{ChannelFile, ScenarioFile};
use swipt_ac::experiments::{run_csi_sweep, run_region};
use swipt_ac::oracle::{validate, ValidationLevel};
use swipt_ac::report::{write_sweep, SolveRecord, SweepKind};
use swipt_ac::{channel, solver, Error};

#[derive(Parser)]
#[command(
    name = "swipt",
    version,
    about = "Robust SWIPT power splitting with AC computing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one channel realization and print the design.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Explicit channel estimate file ({"h_hat": [[re, im], ...]}).
        #[arg(long, conflicts_with = "seed")]
        channel: Option<PathBuf>,
        /// Print the machine-readable record as JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Rate-energy region: AC vs DC computing over a harvest-threshold grid.
    Region {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sweep: SweepArgs,
        /// Harvest thresholds in mW, comma separated.
        #[arg(long, value_delimiter = ',')]
        eps_grid: Option<Vec<f64>>,
    },
    /// Worst-case rate over radiated power and channel error factor.
    CsiSweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sweep: SweepArgs,
        /// Radiated powers in dBm, comma separated.
        #[arg(long, value_delimiter = ',')]
        p0_grid: Option<Vec<f64>>,
        /// Error factors, comma separated.
        #[arg(long, value_delimiter = ',')]
        psi_list: Option<Vec<f64>>,
    },
    /// Check the closed-form design against the brute-force oracles.
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Level::Fast)]
        level: Level,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct Common {
    /// Scenario file or run manifest; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    realizations: Option<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also render an SVG chart of the sweep.
    #[arg(long)]
    plot: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Level {
    Fast,
    Full,
}

enum Failure {
    Validation,
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn load(common: &Common) -> Result<ScenarioFile, Error> {
    let mut scenario = match &common.config {
        Some(path) => ScenarioFile::load(path)?.scenario,
        None => ScenarioFile::default(),
    };
    if let Some(seed) = common.seed {
        scenario.experiments.seed = seed;
    }
    Ok(scenario)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Solve {
            common,
            channel,
            json,
        } => {
            let scenario = load(&common)?;
            scenario.system.validate()?;
            let cfg = &scenario.system;
            let estimate = match channel {
                Some(path) => ChannelFile::load(path)?,
                None => channel::sample_channel(
                    &cfg.fading,
                    cfg.antennas,
                    &mut channel::realization_rng(scenario.experiments.seed, 0),
                )?,
            };
            let sol = solver::solve(cfg, &estimate)?;
            let record = SolveRecord::from(&sol);
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&record).expect("record serializes")
                );
            } else {
                print!("{}", record.render());
            }
        }
        Command::Region {
            common,
            sweep,
            eps_grid,
        } => {
            let mut scenario = load(&common)?;
            if let Some(n) = sweep.realizations {
                scenario.experiments.realizations = n;
            }
            if let Some(grid) = eps_grid {
                scenario.experiments.epsilon_grid_mw = grid;
            }
            scenario.validate()?;
            let result = run_region(&scenario.system, &scenario.experiments)?;
            let manifest = write_sweep(
                &sweep.out,
                SweepKind::Region,
                &scenario,
                &result,
                sweep.plot,
            )?;
            println!("epsilon_mw  scenario  mean_rate_bpshz  feasible_frac");
            for r in &result.rows {
                println!(
                    "{:<10.4e}  {:<8}  {:<15}  {:.4}",
                    r.axis,
                    r.scenario,
                    r.stats
                        .mean_rate_bpshz
                        .map_or("-".into(), |m| format!("{m:.6e}")),
                    r.stats.feasible_frac
                );
            }
            println!("wrote {}", manifest.display());
        }
        Command::CsiSweep {
            common,
            sweep,
            p0_grid,
            psi_list,
        } => {
            let mut scenario = load(&common)?;
            if let Some(n) = sweep.realizations {
                scenario.experiments.realizations = n;
            }
            if let Some(grid) = p0_grid {
                scenario.experiments.p0_grid_dbm = grid;
            }
            if let Some(list) = psi_list {
                scenario.experiments.psi_list = list;
            }
            scenario.validate()?;
            let result = run_csi_sweep(&scenario.system, &scenario.experiments)?;
            let manifest = write_sweep(
                &sweep.out,
                SweepKind::CsiSweep,
                &scenario,
                &result,
                sweep.plot,
            )?;
            println!("p0_dbm  psi     mean_rate_bpshz  feasible_frac");
            for r in &result.rows {
                println!(
                    "{:<6}  {:<6}  {:<15}  {:.4}",
                    r.axis,
                    r.psi,
                    r.stats
                        .mean_rate_bpshz
                        .map_or("-".into(), |m| format!("{m:.6e}")),
                    r.stats.feasible_frac
                );
            }
            println!("wrote {}", manifest.display());
        }
        Command::Validate {
            common,
            level,
            json,
        } => {
            let scenario = load(&common)?;
            let level = match level {
                Level::Fast => ValidationLevel::Fast,
                Level::Full => ValidationLevel::Full,
            };
            let report = validate(&scenario.system, level, scenario.experiments.seed)?;
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report).expect("report serializes")
                );
            } else {
                for c in &report.checks {
                    println!(
                        "[{}] {:<26} observed {:<12.4e} tolerance: {}",
                        if c.passed { "PASS" } else { "FAIL" },
                        c.name,
                        c.observed,
                        c.tolerance
                    );
                    println!("       {}", c.detail);
                }
            }
            if !report.passed {
                return Err(Failure::Validation);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation) => {
            eprintln!("validation failed");
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            if e.is_config_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
