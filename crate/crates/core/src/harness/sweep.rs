//! Parameter sweeps over a base configuration.
//!
//! ```toml
//! [base]
//! # a complete run configuration, tables nested as [base.exponents] etc.
//!
//! [axes]
//! alpha = ["1/4", "1/2", "6/7", 1]
//! amplitude = [1.0, 4.0]
//! ```

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ConfigError, RunConfig};
use super::record::{self, Outcome, RunRecord};
use super::{check_params, io_error, simulate, HarnessError};
use crate::model::Real;

pub const MAX_SWEEP_POINTS: usize = 10_000;
pub const REGISTRY_FILE: &str = "registry.json";

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxes {
    #[serde(default)]
    pub gamma: Vec<Real>,
    #[serde(default)]
    pub p: Vec<Real>,
    #[serde(default)]
    pub q: Vec<Real>,
    #[serde(default)]
    pub alpha: Vec<Real>,
    #[serde(default)]
    pub mu1: Vec<f64>,
    #[serde(default)]
    pub amplitude: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub base: RunConfig,
    #[serde(default)]
    pub axes: SweepAxes,
}

fn axis<T: Clone>(values: &[T], base: T) -> Vec<T> {
    if values.is_empty() {
        vec![base]
    } else {
        values.to_vec()
    }
}

impl SweepConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let sweep: SweepConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        let points = sweep.point_count();
        if points > MAX_SWEEP_POINTS {
            return Err(ConfigError::Invalid {
                field: "axes",
                reason: format!("{points} points exceed the limit of {MAX_SWEEP_POINTS}"),
            });
        }
        Ok(sweep)
    }

    pub fn point_count(&self) -> usize {
        let a = &self.axes;
        [a.gamma.len(), a.p.len(), a.q.len(), a.alpha.len(), a.mu1.len(), a.amplitude.len()]
            .iter()
            .map(|&n| n.max(1))
            .product()
    }

    /// Every parameter tuple in lexicographic order of
    /// `(γ, p, q, α, μ₁, amplitude)`.
    pub fn points(&self) -> Vec<RunConfig> {
        let (a, b) = (&self.axes, &self.base);
        let e = &b.exponents;
        let mut out = Vec::with_capacity(self.point_count());
        for gamma in axis(&a.gamma, e.gamma.clone()) {
            for p in axis(&a.p, e.p.clone()) {
                for q in axis(&a.q, e.q.clone()) {
                    for alpha in axis(&a.alpha, e.alpha.clone()) {
                        for &mu1 in &axis(&a.mu1, b.coefficients.mu1) {
                            for &amplitude in &axis(&a.amplitude, b.initial.amplitude) {
                                let mut cfg = b.clone();
                                cfg.exponents.gamma = gamma.clone();
                                cfg.exponents.p = p.clone();
                                cfg.exponents.q = q.clone();
                                cfg.exponents.alpha = alpha.clone();
                                cfg.coefficients.mu1 = mu1;
                                cfg.initial.amplitude = amplitude;
                                out.push(cfg);
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

fn run_point(cfg: &RunConfig, out: &Path) -> RunRecord {
    let error = |outcome, e: &dyn std::fmt::Display| RunRecord::without_run(cfg, outcome, Some(e.to_string()));
    match check_params(cfg) {
        Err(e) => return error(Outcome::Error, &e),
        Ok(report) if !report.accepted && !cfg.solver.force_inadmissible => {
            let names: Vec<_> = report.violations.iter().map(|c| c.name()).collect();
            return RunRecord::without_run(cfg, Outcome::InadmissibleSkipped, Some(names.join(", ")));
        }
        Ok(_) => {}
    }
    let hash = cfg.config_hash();
    let dir = out.join("runs").join(&hash);
    match simulate(cfg, &dir) {
        Ok(mut r) => {
            r.trajectory_csv = Some(format!("runs/{hash}/{}", super::TRAJECTORY_FILE));
            r
        }
        Err(e) => error(Outcome::Error, &e),
    }
}

/// Runs every tuple on `jobs` workers and writes `registry.json` into
/// `out`. Records come back in tuple order whatever the completion order.
pub fn run_sweep(sweep: &SweepConfig, out: &Path, jobs: usize) -> Result<Vec<RunRecord>, HarnessError> {
    let mut seen = HashSet::new();
    let mut points = Vec::new();
    for cfg in sweep.points() {
        let hash = cfg.config_hash();
        if seen.insert(hash.clone()) {
            points.push(cfg);
        } else {
            warn!("duplicate configuration {hash} dropped from the sweep");
        }
    }
    fs::create_dir_all(out).map_err(io_error(out))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| HarnessError::Input(format!("cannot start {jobs} workers: {e}")))?;
    let records: Vec<RunRecord> = pool.install(|| points.par_iter().map(|cfg| run_point(cfg, out)).collect());
    record::write_json(&out.join(REGISTRY_FILE), &records)?;
    Ok(records)
}
