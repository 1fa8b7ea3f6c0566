//! Configuration files, runs, sweeps and the lemma suite.

pub mod config;
pub mod lemmas;
pub mod record;
pub mod sweep;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use thiserror::Error;

use crate::evolve::{RunError, Simulation};
use crate::model::{mass_bound, validate_exponents, AdmissibilityReport, CoefficientField, ModelError};
use config::{ConfigError, RunConfig};
use record::{Outcome, Parameters, RunRecord, Summary};

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const SUMMARY_FILE: &str = "summary.json";

/// Process exit codes of the command line tool.
pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const INADMISSIBLE: i32 = 2;
    pub const INPUT: i32 = 3;
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Config { path: PathBuf, source: ConfigError },
    #[error("configuration is inadmissible: {}", violation_list(.0))]
    Inadmissible(Box<AdmissibilityReport>),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error("writing {path}: {message}")]
    Output { path: PathBuf, message: String },
    #[error("{0}")]
    Input(String),
}

fn violation_list(report: &AdmissibilityReport) -> String {
    report.violations.iter().map(|c| c.name()).collect::<Vec<_>>().join(", ")
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Io { .. } | HarnessError::Config { .. } | HarnessError::Input(_) => exit::INPUT,
            HarnessError::Inadmissible(_) | HarnessError::Run(RunError::Inadmissible(_)) => exit::INADMISSIBLE,
            HarnessError::Run(RunError::Config(_) | RunError::Model(_)) => exit::INPUT,
            HarnessError::Run(_) | HarnessError::Output { .. } => exit::FAILURE,
        }
    }
}

pub(crate) fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io { path: path.to_path_buf(), source }
}

pub fn load_config(path: &Path) -> Result<RunConfig, HarnessError> {
    let text = fs::read_to_string(path).map_err(io_error(path))?;
    RunConfig::from_toml_str(&text).map_err(|source| HarnessError::Config { path: path.to_path_buf(), source })
}

/// Exponent checks plus the coefficient checks at every grid node.
pub fn check_params(cfg: &RunConfig) -> Result<AdmissibilityReport, ConfigError> {
    cfg.validate()?;
    let mut report = validate_exponents(&cfg.exponents)?;
    let grid = cfg.build_grid()?;
    let field = CoefficientField::sample(&cfg.coefficient_spec(), &grid, cfg.exponents.alpha.to_f64());
    if field.kappa.iter().chain(&field.mu).any(|x| !x.is_finite()) {
        return Err(ModelError::NonFinite { field: "coefficients" }.into());
    }
    report.absorb_nodes(field.violations(&grid));
    Ok(report)
}

/// Runs `cfg` and writes the trajectory CSV and summary JSON into `out`.
pub fn simulate(cfg: &RunConfig, out: &Path) -> Result<RunRecord, HarnessError> {
    let report = check_params(cfg).map_err(|source| HarnessError::Config { path: out.to_path_buf(), source })?;
    if !report.accepted && !cfg.solver.force_inadmissible {
        return Err(HarnessError::Inadmissible(Box::new(report)));
    }
    let started = Instant::now();
    let mut sim = Simulation::from_config(cfg)?;
    let k = mass_bound(&sim.state.u, &sim.grid, &sim.coefficients).map_err(RunError::from)?;
    let trajectory = sim.run(cfg.time.t_end, cfg.time.sample_interval);
    let wall_time = started.elapsed().as_secs_f64();

    fs::create_dir_all(out).map_err(io_error(out))?;
    let csv_path = out.join(TRAJECTORY_FILE);
    record::write_trajectory(&csv_path, &trajectory.samples)?;
    let record = RunRecord {
        config_hash: cfg.config_hash(),
        parameters: Parameters::of(cfg),
        outcome: if trajectory.completed() { Outcome::Completed } else { Outcome::Blowup },
        blowup_reason: trajectory.blowup.map(|b| b.reason.to_string()),
        terminated_at: Some(trajectory.terminated_at),
        max_mass: Some(trajectory.max_mass),
        mass_bound: Some(k),
        max_lq: Some(trajectory.max_lq),
        max_linf: Some(trajectory.max_linf),
        min_u: Some(trajectory.min_u),
        steps: trajectory.steps,
        trajectory_csv: Some(TRAJECTORY_FILE.into()),
        error: None,
        wall_time_s: wall_time,
    };
    record::write_json(&out.join(SUMMARY_FILE), &Summary::of(&record))?;
    info!(
        "{}: {} at t = {} after {} steps in {wall_time:.2} s",
        record.config_hash, record.outcome, trajectory.terminated_at, trajectory.steps
    );
    Ok(record)
}
