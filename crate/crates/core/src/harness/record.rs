//! Run records and the files they point to.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::{io_error, HarnessError};
use crate::evolve::Sample;
use crate::model::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    #[serde(rename = "completed")]
    Completed,
    #[serde(rename = "blowup")]
    Blowup,
    #[serde(rename = "error")]
    Error,
    #[serde(rename = "inadmissible (skipped)")]
    InadmissibleSkipped,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Completed => "completed",
            Outcome::Blowup => "blowup",
            Outcome::Error => "error",
            Outcome::InadmissibleSkipped => "inadmissible (skipped)",
        })
    }
}

/// The sweepable parameters of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    pub gamma: Real,
    pub p: Real,
    pub q: Real,
    pub alpha: Real,
    pub mu1: f64,
    pub amplitude: f64,
}

impl Parameters {
    pub fn of(cfg: &RunConfig) -> Self {
        let e = &cfg.exponents;
        Self {
            gamma: e.gamma.clone(),
            p: e.p.clone(),
            q: e.q.clone(),
            alpha: e.alpha.clone(),
            mu1: cfg.coefficients.mu1,
            amplitude: cfg.initial.amplitude,
        }
    }
}

/// Outcome and summary statistics of one run. Statistics are absent for
/// runs that never started.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config_hash: String,
    pub parameters: Parameters,
    pub outcome: Outcome,
    pub blowup_reason: Option<String>,
    pub terminated_at: Option<f64>,
    pub max_mass: Option<f64>,
    /// `K = max{∫u₀, k₁/μ₁·|Ω|}`.
    #[serde(rename = "K")]
    pub mass_bound: Option<f64>,
    pub max_lq: Option<f64>,
    pub max_linf: Option<f64>,
    pub min_u: Option<f64>,
    pub steps: usize,
    /// Relative to the directory holding the record.
    pub trajectory_csv: Option<String>,
    pub error: Option<String>,
    /// Reported in `summary.json` only.
    #[serde(skip)]
    pub wall_time_s: f64,
}

impl RunRecord {
    /// A record for a run that produced no trajectory.
    pub fn without_run(cfg: &RunConfig, outcome: Outcome, error: Option<String>) -> Self {
        Self {
            config_hash: cfg.config_hash(),
            parameters: Parameters::of(cfg),
            outcome,
            blowup_reason: None,
            terminated_at: None,
            max_mass: None,
            mass_bound: None,
            max_lq: None,
            max_linf: None,
            min_u: None,
            steps: 0,
            trajectory_csv: None,
            error,
            wall_time_s: 0.0,
        }
    }
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub config_hash: String,
    pub outcome: Outcome,
    pub terminated_at: Option<f64>,
    pub blowup_reason: Option<String>,
    pub max_mass: Option<f64>,
    pub max_lq: Option<f64>,
    pub max_linf: Option<f64>,
    #[serde(rename = "K")]
    pub mass_bound: Option<f64>,
    pub steps: usize,
    pub wall_time_s: f64,
}

impl Summary {
    pub fn of(r: &RunRecord) -> Self {
        Self {
            config_hash: r.config_hash.clone(),
            outcome: r.outcome,
            terminated_at: r.terminated_at,
            blowup_reason: r.blowup_reason.clone(),
            max_mass: r.max_mass,
            max_lq: r.max_lq,
            max_linf: r.max_linf,
            mass_bound: r.mass_bound,
            steps: r.steps,
            wall_time_s: r.wall_time_s,
        }
    }
}

/// Writes samples with the header `t,mass,lq_norm,linf_norm,dt,min_u`.
pub fn write_trajectory(path: &Path, samples: &[Sample]) -> Result<(), HarnessError> {
    let output = |e: csv::Error| HarnessError::Output { path: path.to_path_buf(), message: e.to_string() };
    let file = File::create(path).map_err(io_error(path))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    for s in samples {
        w.serialize(s).map_err(output)?;
    }
    w.flush().map_err(io_error(path))
}

pub fn read_trajectory(path: &Path) -> Result<Vec<Sample>, HarnessError> {
    let input = |e: csv::Error| HarnessError::Input(format!("{}: {e}", path.display()));
    let mut r = csv::Reader::from_path(path).map_err(input)?;
    r.deserialize().collect::<Result<_, _>>().map_err(input)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let file = File::create(path).map_err(io_error(path))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| HarnessError::Output { path: path.to_path_buf(), message: e.to_string() })?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(io_error(path))
}
