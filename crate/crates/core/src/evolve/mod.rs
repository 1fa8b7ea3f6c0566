//! Positivity preserving time stepping for the cell density.
//!
//! Each step applies, in order: the explicit upwind chemotaxis flux, the
//! Patankar reaction update `u ← (u + dt κu)/(1 + dt μ u^{p−1})`, backward
//! Euler diffusion, and a fresh signal solve. Every substep maps
//! nonnegative data to nonnegative data under the step size limits below.

mod trajectory;

use std::fmt;

use log::{debug, warn};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::elliptic::{face_gradients, solve_signal, EllipticError, SignalField};
use crate::harness::config::{ConfigError, RunConfig};
use crate::linalg::SolverError;
use crate::model::{
    sample_coefficients, validate_exponents, AdmissibilityReport, CoefficientField, Grid, ModelError,
};
use crate::norms::{integrate, lq_norm};

pub use trajectory::{Blowup, Sample, Trajectory};

/// Fraction of the explicit stability limits actually used.
pub const CFL: f64 = 0.4;
/// Accepted steps without a rejection before `dt` is doubled.
pub const GROWTH_STREAK: usize = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("configuration violates the admissibility conditions")]
    Inadmissible(Box<AdmissibilityReport>),
    #[error("initial signal solve failed: {0}")]
    Signal(#[from] EllipticError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlowupReason {
    #[serde(rename = "L∞ threshold")]
    LinfThreshold,
    #[serde(rename = "stiffness collapse")]
    StiffnessCollapse,
}

impl fmt::Display for BlowupReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BlowupReason::LinfThreshold => "L∞ threshold",
            BlowupReason::StiffnessCollapse => "stiffness collapse",
        })
    }
}

/// Step size and detector settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPolicy {
    pub dt_min: f64,
    pub dt_max: f64,
    pub blowup_factor: f64,
    /// `max(1, ‖u₀‖_∞)`.
    pub reference_linf: f64,
    pub tol: f64,
}

impl StepPolicy {
    pub fn threshold(&self) -> f64 {
        self.blowup_factor * self.reference_linf
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    /// Step size the adaptive policy will try next.
    pub dt: f64,
    pub u: Vec<f64>,
    pub v: SignalField,
    pub step_count: usize,
    /// Step size of the last accepted step.
    pub last_dt: f64,
    clean_streak: usize,
}

/// Flags `‖u‖_∞` above `blowup_factor · max(1, ‖u₀‖_∞)` (or non-finite) and
/// step sizes below `dt_min`.
pub fn detect_blowup(state: &SimState, policy: &StepPolicy) -> Option<BlowupReason> {
    let linf = state.u.iter().fold(0.0f64, |m, &x| if x.is_nan() { f64::NAN } else { m.max(x.abs()) });
    if !(linf <= policy.threshold()) {
        return Some(BlowupReason::LinfThreshold);
    }
    if state.dt < policy.dt_min {
        return Some(BlowupReason::StiffnessCollapse);
    }
    None
}

#[derive(Debug, Clone, PartialEq, Error)]
enum StepFailure {
    #[error("negative density {0:e}")]
    Positivity(f64),
    #[error("non-finite density")]
    NonFinite,
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Signal(#[from] EllipticError),
}

/// A grid, its sampled coefficients and the evolving state.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub grid: Grid,
    pub coefficients: CoefficientField,
    pub gamma: f64,
    pub p: f64,
    /// Exponent of the monitored `L^q` norm.
    pub q: f64,
    pub policy: StepPolicy,
    pub state: SimState,
}

impl Simulation {
    /// Solves the initial signal from `u0`.
    pub fn new(
        grid: Grid,
        coefficients: CoefficientField,
        (gamma, p, q): (f64, f64, f64),
        mut policy: StepPolicy,
        u0: Vec<f64>,
        dt0: f64,
    ) -> Result<Self, RunError> {
        if u0.len() != grid.len() {
            return Err(ConfigError::Invalid { field: "u0", reason: "length differs from the grid".into() }.into());
        }
        policy.reference_linf = u0.iter().fold(1.0f64, |m, &x| m.max(x));
        let v = solve_signal(&u0, &grid, gamma, policy.tol)?;
        let state = SimState { t: 0.0, dt: dt0, u: u0, v, step_count: 0, last_dt: dt0, clean_streak: 0 };
        Ok(Self { grid, coefficients, gamma, p, q, policy, state })
    }

    /// Builds the simulation described by `cfg`, refusing inadmissible
    /// exponents or coefficients unless `force_inadmissible` is set.
    pub fn from_config(cfg: &RunConfig) -> Result<Self, RunError> {
        cfg.validate()?;
        let grid = cfg.build_grid()?;
        let alpha = cfg.exponents.alpha.to_f64();
        let force = cfg.solver.force_inadmissible;
        let mut report = validate_exponents(&cfg.exponents)?;
        let coefficients = match sample_coefficients(&cfg.coefficient_spec(), &grid, alpha) {
            Ok(c) => c,
            Err(ModelError::CoefficientViolation(nodes)) => {
                report.absorb_nodes(nodes);
                CoefficientField::sample(&cfg.coefficient_spec(), &grid, alpha)
            }
            Err(e) => return Err(e.into()),
        };
        if !report.accepted {
            if !force {
                return Err(RunError::Inadmissible(Box::new(report)));
            }
            warn!("running inadmissible configuration {}", cfg.config_hash());
        }
        let u0 = cfg.initial_datum(&grid)?;
        let e = &cfg.exponents;
        let policy = StepPolicy {
            dt_min: cfg.time.dt_min,
            dt_max: cfg.time.dt_max,
            blowup_factor: cfg.solver.blowup_factor,
            reference_linf: 1.0,
            tol: cfg.solver.tol,
        };
        Self::new(grid, coefficients, (e.gamma.to_f64(), e.p.to_f64(), e.q.to_f64()), policy, u0, cfg.time.dt0)
    }

    /// Largest step allowed by the explicit chemotaxis and growth terms.
    pub fn stability_limit(&self) -> f64 {
        let grid = &self.grid;
        let w = face_gradients(&self.state.v.v, grid);
        let max_w = w.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut limit = f64::INFINITY;
        if max_w > 0.0 {
            limit = limit.min(CFL * grid.spacing() / max_w);
            let mut outflow = vec![0.0; grid.len()];
            for (f, &wf) in grid.faces().iter().zip(&w) {
                let from = if wf > 0.0 { f.lo } else { f.hi };
                outflow[from] += f.area * wf.abs();
            }
            for (out, vol) in outflow.iter().zip(grid.weights()) {
                if *out > 0.0 {
                    limit = limit.min(CFL * vol / out);
                }
            }
        }
        let kappa = self.coefficients.kappa_sup();
        if kappa > 0.0 {
            limit = limit.min(0.5 / kappa);
        }
        limit
    }

    /// One step of length `dt` from the current state, without committing it.
    fn try_step(&self, dt: f64) -> Result<(Vec<f64>, SignalField), StepFailure> {
        let grid = &self.grid;
        let vol = grid.weights();
        let u = &self.state.u;
        let w = face_gradients(&self.state.v.v, grid);

        let mut change = vec![0.0; u.len()];
        for (f, &wf) in grid.faces().iter().zip(&w) {
            let upwind = if wf > 0.0 { u[f.lo] } else { u[f.hi] };
            let flux = f.area * wf * upwind;
            change[f.lo] -= flux;
            change[f.hi] += flux;
        }
        let mut next: Vec<f64> = (0..u.len()).map(|i| u[i] + dt * change[i] / vol[i]).collect();
        if let Some(&bad) = next.iter().find(|&&x| x < 0.0) {
            return Err(StepFailure::Positivity(bad));
        }

        let (kappa, mu) = (&self.coefficients.kappa, &self.coefficients.mu);
        for (i, x) in next.iter_mut().enumerate() {
            if *x > 0.0 {
                *x = (*x + dt * kappa[i] * *x) / (1.0 + dt * mu[i] * x.powf(self.p - 1.0));
            }
        }

        let shift: Vec<f64> = vol.iter().map(|v| v / dt).collect();
        let rhs: Vec<f64> = next.iter().zip(&shift).map(|(x, s)| x * s).collect();
        let mut sol = grid.solve_shifted(&shift, &rhs, self.policy.tol)?.x;
        if sol.iter().any(|x| !x.is_finite()) {
            return Err(StepFailure::NonFinite);
        }
        let max = sol.iter().fold(0.0f64, |m, &x| m.max(x));
        let floor = -10.0 * self.policy.tol * max;
        for x in &mut sol {
            if *x < 0.0 {
                if *x < floor {
                    return Err(StepFailure::Positivity(*x));
                }
                // Iterative solves leave round-off sized negatives on tensor grids.
                *x = 0.0;
            }
        }
        let v = solve_signal(&sol, grid, self.gamma, self.policy.tol)?;
        Ok((sol, v))
    }

    /// Advances to exactly `target`, or stops early on blow-up.
    pub fn advance_to(&mut self, target: f64, trajectory: &mut Trajectory) -> Option<BlowupReason> {
        while self.state.t < target {
            let policy_dt = self.state.dt.min(self.stability_limit()).min(self.policy.dt_max);
            self.state.dt = policy_dt;
            if let Some(reason) = detect_blowup(&self.state, &self.policy) {
                return Some(reason);
            }
            let remaining = target - self.state.t;
            let (dt, lands) = if policy_dt >= remaining { (remaining, true) } else { (policy_dt, false) };
            match self.try_step(dt) {
                Ok((u, v)) => {
                    self.state.u = u;
                    self.state.v = v;
                    self.state.t = if lands { target } else { self.state.t + dt };
                    self.state.step_count += 1;
                    self.state.last_dt = dt;
                    self.state.clean_streak += 1;
                    if self.state.clean_streak >= GROWTH_STREAK {
                        self.state.dt = (2.0 * self.state.dt).min(self.policy.dt_max);
                        self.state.clean_streak = 0;
                    }
                    trajectory.observe(self.monitor(dt));
                    if let Some(reason) = detect_blowup(&self.state, &self.policy) {
                        return Some(reason);
                    }
                }
                Err(failure) => {
                    debug!("step rejected at t = {} with dt = {dt:e}: {failure}", self.state.t);
                    self.state.dt = 0.5 * dt;
                    self.state.clean_streak = 0;
                }
            }
        }
        None
    }

    /// Monitored quantities of the current state.
    pub fn monitor(&self, dt: f64) -> Sample {
        let u = &self.state.u;
        Sample {
            t: self.state.t,
            mass: integrate(u, self.grid.weights()),
            lq_norm: lq_norm(u, &self.grid, self.q.max(1.0)).unwrap_or(f64::NAN),
            linf_norm: u.iter().fold(0.0f64, |m, x| m.max(x.abs())),
            dt,
            min_u: u.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }

    /// Integrates to `t_end`, sampling every `sample_interval`.
    pub fn run(&mut self, t_end: f64, sample_interval: f64) -> Trajectory {
        let mut trajectory = Trajectory::default();
        let first = self.monitor(self.state.dt);
        trajectory.observe(first.clone());
        trajectory.record(first);
        let intervals = (t_end / sample_interval - 1e-9).ceil().max(1.0) as usize;
        for k in 1..=intervals {
            let target = if k == intervals { t_end } else { k as f64 * sample_interval };
            if let Some(reason) = self.advance_to(target, &mut trajectory) {
                trajectory.record(self.monitor(self.state.last_dt));
                trajectory.blowup = Some(Blowup { time: self.state.t, reason });
                warn!("blow-up flag at t = {}: {reason}", self.state.t);
                break;
            }
            trajectory.record(self.monitor(self.state.last_dt));
        }
        trajectory.terminated_at = self.state.t;
        trajectory
    }
}

/// Runs the configuration from `u₀` to `t_end` or to a blow-up flag.
pub fn run(cfg: &RunConfig) -> Result<Trajectory, RunError> {
    let mut sim = Simulation::from_config(cfg)?;
    Ok(sim.run(cfg.time.t_end, cfg.time.sample_interval))
}
