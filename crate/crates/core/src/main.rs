use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use chemo_core::harness::config::RunConfig;
use chemo_core::harness::lemmas::{verify_lemmas, SuiteConfig, DEFAULT_SAMPLES};
use chemo_core::harness::sweep::{run_sweep, SweepConfig};
use chemo_core::harness::{check_params, exit, load_config, simulate, HarnessError};

/// Simulation and verification tool for the chemotaxis system with
/// nonlinear secretion and a heterogeneous logistic source.
#[derive(Debug, Parser)]
#[command(name = "chemo-sim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides `solver.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Runs configurations that fail the admissibility checks.
    #[arg(long)]
    force_inadmissible: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Checks exponents and coefficients; exit code 2 if inadmissible.
    CheckParams {
        #[arg(long)]
        config: PathBuf,
    },
    /// Runs one configuration and writes trajectory.csv and summary.json.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Runs every tuple of a sweep and writes registry.json.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Runs the seeded oracle suite; exit code 1 if any check fails.
    VerifyLemmas {
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, hide = true, default_value_t = 1.0)]
        corrupt_damping: f64,
    },
}

fn apply_overrides(cfg: &mut RunConfig, run: &RunArgs) {
    if let Some(seed) = run.seed {
        cfg.solver.seed = seed;
    }
    cfg.solver.force_inadmissible |= run.force_inadmissible;
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("records serialise"));
}

fn load_sweep(path: &Path) -> Result<SweepConfig, HarnessError> {
    let text = fs::read_to_string(path).map_err(|source| HarnessError::Io { path: path.into(), source })?;
    SweepConfig::from_toml_str(&text).map_err(|source| HarnessError::Config { path: path.into(), source })
}

fn execute(command: Command) -> Result<i32, HarnessError> {
    match command {
        Command::CheckParams { config } => {
            let cfg = load_config(&config)?;
            let report = check_params(&cfg).map_err(|source| HarnessError::Config { path: config, source })?;
            print_json(&report);
            Ok(if report.accepted { exit::OK } else { exit::INADMISSIBLE })
        }
        Command::Simulate { run, out } => {
            let mut cfg = load_config(&run.config)?;
            apply_overrides(&mut cfg, &run);
            let record = simulate(&cfg, &out)?;
            print_json(&record);
            Ok(exit::OK)
        }
        Command::Sweep { run, out, jobs } => {
            let mut sweep = load_sweep(&run.config)?;
            apply_overrides(&mut sweep.base, &run);
            let records = run_sweep(&sweep, &out, jobs)?;
            let mut counts = std::collections::BTreeMap::new();
            for r in &records {
                *counts.entry(r.outcome.to_string()).or_insert(0usize) += 1;
            }
            for (outcome, count) in counts {
                println!("{outcome}: {count}");
            }
            Ok(exit::OK)
        }
        Command::VerifyLemmas { samples, seed, corrupt_damping } => {
            let suite = SuiteConfig { samples, seed, damping_scale: corrupt_damping };
            let report = verify_lemmas(&suite).map_err(|e| HarnessError::Input(e.to_string()))?;
            println!("{report}");
            Ok(if report.passed() { exit::OK } else { exit::FAILURE })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CHEMO_SIM_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::INPUT as u8 } else { exit::OK as u8 });
        }
    };
    let code = match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if let HarnessError::Inadmissible(report) = &e {
                eprintln!("{}", serde_json::to_string_pretty(report).expect("reports serialise"));
            }
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
