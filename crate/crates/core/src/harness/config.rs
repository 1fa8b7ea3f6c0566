//! Experiment definitions read from TOML.
//!
//! ```toml
//! [exponents]
//! n = 2
//! gamma = 1.5
//! p = 4
//! q = 2
//! alpha = "1/2"
//!
//! [coefficients]
//! kappa = "0.2"
//! mu = "mu1 * s^alpha"
//! mu1 = 1.0
//!
//! [grid]
//! mode = "radial"
//! cells = 400
//! radius = 1.0
//!
//! [initial]
//! profile = "bump"
//! amplitude = 2.0
//! width = 0.3
//!
//! [time]
//! t_end = 10.0
//! dt0 = 1e-3
//! dt_max = 0.05
//! sample_interval = 0.1
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::model::expr::Expression;
use crate::model::{Bindings, CoefficientSpec, ExponentSet, Grid, ModelError, RadialFunction, RadialGrid, TensorGrid};

/// Most samples a single run may record.
pub const MAX_SAMPLES: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Parse(String),
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("initial datum is negative or not finite at node {index} ({value})")]
    InitialDatum { index: usize, value: f64 },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field, reason: reason.into() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub exponents: ExponentSet,
    pub coefficients: CoefficientsConfig,
    pub grid: GridConfig,
    pub initial: InitialConfig,
    pub time: TimeConfig,
    #[serde(default)]
    pub solver: SolverConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientsConfig {
    pub kappa: RadialFunction,
    pub mu: RadialFunction,
    pub mu1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridMode {
    #[default]
    Radial,
    Tensor2d,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default)]
    pub mode: GridMode,
    /// Radial cells, or lattice side length for `tensor2d`.
    pub cells: usize,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    /// `bump`, `constant`, `two-bumps` or a radial expression in `s`.
    pub profile: String,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default = "default_width")]
    pub width: f64,
    /// Relative multiplicative noise in `[0, 1]`, drawn from `solver.seed`.
    #[serde(default)]
    pub noise: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t_end: f64,
    pub dt0: f64,
    #[serde(default = "default_dt_min")]
    pub dt_min: f64,
    pub dt_max: f64,
    pub sample_interval: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_blowup_factor")]
    pub blowup_factor: f64,
    #[serde(default)]
    pub force_inadmissible: bool,
    #[serde(default)]
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: default_tol(),
            blowup_factor: default_blowup_factor(),
            force_inadmissible: false,
            seed: 0,
        }
    }
}

fn one() -> f64 {
    1.0
}
fn default_width() -> f64 {
    0.25
}
fn default_dt_min() -> f64 {
    1e-10
}
fn default_tol() -> f64 {
    1e-10
}
fn default_blowup_factor() -> f64 {
    1e6
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialProfile {
    Bump,
    Constant,
    TwoBumps,
    Expr(Expression),
}

impl InitialProfile {
    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        Ok(match s.trim() {
            "bump" => Self::Bump,
            "constant" => Self::Constant,
            "two-bumps" => Self::TwoBumps,
            other => Self::Expr(Expression::parse(other).map_err(|e| invalid("initial.profile", e.to_string()))?),
        })
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("run configs always serialise")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let t = &self.time;
        let positive = |field, x: f64| {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(invalid(field, format!("must be positive and finite, got {x}")))
            }
        };
        positive("time.t_end", t.t_end)?;
        positive("time.dt0", t.dt0)?;
        positive("time.dt_min", t.dt_min)?;
        positive("time.dt_max", t.dt_max)?;
        positive("time.sample_interval", t.sample_interval)?;
        if !(t.dt_min < t.dt0 && t.dt0 <= t.dt_max) {
            return Err(invalid("time", "requires dt_min < dt0 ≤ dt_max"));
        }
        if t.t_end / t.sample_interval > MAX_SAMPLES {
            return Err(invalid("time.sample_interval", "too many samples"));
        }
        positive("grid.radius", self.grid.radius)?;
        positive("coefficients.mu1", self.coefficients.mu1)?;
        positive("solver.tol", self.solver.tol)?;
        if !(self.solver.blowup_factor > 1.0) {
            return Err(invalid("solver.blowup_factor", "must exceed 1"));
        }
        if self.grid.mode == GridMode::Tensor2d && self.exponents.n != 2 {
            return Err(invalid("grid.mode", "tensor2d requires n = 2"));
        }
        let init = &self.initial;
        if !(init.amplitude >= 0.0 && init.amplitude.is_finite()) {
            return Err(invalid("initial.amplitude", "must be nonnegative"));
        }
        positive("initial.width", init.width)?;
        if !(0.0..=1.0).contains(&init.noise) {
            return Err(invalid("initial.noise", "must lie in [0, 1]"));
        }
        let profile = InitialProfile::parse(&init.profile)?;
        if profile == InitialProfile::TwoBumps && self.grid.mode != GridMode::Tensor2d {
            return Err(invalid("initial.profile", "two-bumps needs the tensor2d grid"));
        }
        Ok(())
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("run configs always serialise");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn build_grid(&self) -> Result<Grid, ConfigError> {
        Ok(match self.grid.mode {
            GridMode::Radial => RadialGrid::new(self.exponents.n, self.grid.radius, self.grid.cells)?.into(),
            GridMode::Tensor2d => TensorGrid::disk(self.grid.radius, self.grid.cells)?.into(),
        })
    }

    pub fn coefficient_spec(&self) -> CoefficientSpec {
        CoefficientSpec {
            kappa: self.coefficients.kappa.clone(),
            mu: self.coefficients.mu.clone(),
            mu1: self.coefficients.mu1,
            radius: self.grid.radius,
        }
    }

    pub fn bindings(&self) -> Bindings {
        Bindings { mu1: self.coefficients.mu1, alpha: self.exponents.alpha.to_f64() }
    }

    /// Samples `u₀` at the cell centres of `grid`.
    pub fn initial_datum(&self, grid: &Grid) -> Result<Vec<f64>, ConfigError> {
        let init = &self.initial;
        let (a, w) = (init.amplitude, init.width);
        let gauss = |d2: f64| (-d2 / (w * w)).exp();
        let mut u: Vec<f64> = match (InitialProfile::parse(&init.profile)?, grid) {
            (InitialProfile::Bump, _) => grid.radii().iter().map(|r| a * gauss(r * r)).collect(),
            (InitialProfile::Constant, _) => vec![a; grid.len()],
            (InitialProfile::TwoBumps, Grid::Tensor(g)) => {
                let c = 0.5 * g.radius();
                g.centers()
                    .iter()
                    .map(|[x, y]| a * (gauss((x - c).powi(2) + y * y) + gauss((x + c).powi(2) + y * y)))
                    .collect()
            }
            (InitialProfile::TwoBumps, Grid::Radial(_)) => {
                return Err(invalid("initial.profile", "two-bumps needs the tensor2d grid"))
            }
            (InitialProfile::Expr(e), _) => {
                let b = self.bindings();
                grid.radii().iter().map(|&r| a * e.eval(r, &b)).collect()
            }
        };
        if init.noise > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(self.solver.seed);
            for x in &mut u {
                *x *= 1.0 + init.noise * rng.gen_range(-1.0..=1.0);
            }
        }
        if let Some(index) = u.iter().position(|&x| !(x >= 0.0 && x.is_finite())) {
            return Err(ConfigError::InitialDatum { index, value: u[index] });
        }
        Ok(u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Real;

    const DEMO: &str = r#"
[exponents]
n = 2
gamma = 1.5
p = 4
q = 2
alpha = 0.5

[coefficients]
kappa = "0.2"
mu = "mu1 * s^alpha"
mu1 = 1.0

[grid]
cells = 100
radius = 1.0

[initial]
profile = "bump"
amplitude = 2.0

[time]
t_end = 1.0
dt0 = 1e-3
dt_max = 0.05
sample_interval = 0.1
"#;

    #[test]
    fn parses_demo_with_defaults() {
        let cfg = RunConfig::from_toml_str(DEMO).unwrap();
        assert_eq!(cfg.exponents.gamma, Real::ratio(3, 2));
        assert_eq!(cfg.grid.mode, GridMode::Radial);
        assert_eq!(cfg.time.dt_min, 1e-10);
        assert_eq!(cfg.solver.blowup_factor, 1e6);
        let grid = cfg.build_grid().unwrap();
        let u0 = cfg.initial_datum(&grid).unwrap();
        assert_eq!(u0.len(), 100);
        assert!((u0[0] - 2.0).abs() < 1e-3);
    }

    #[test]
    fn rational_strings_accepted() {
        let cfg = RunConfig::from_toml_str(&DEMO.replace("alpha = 0.5", "alpha = \"6/7\"")).unwrap();
        assert_eq!(cfg.exponents.alpha, Real::ratio(6, 7));
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = RunConfig::from_toml_str(DEMO).unwrap();
        let b = RunConfig::from_toml_str(DEMO).unwrap();
        assert_eq!(a.config_hash(), b.config_hash());
        assert_eq!(a.config_hash().len(), 16);
        let c = RunConfig::from_toml_str(&DEMO.replace("amplitude = 2.0", "amplitude = 2.5")).unwrap();
        assert_ne!(a.config_hash(), c.config_hash());
        let round = RunConfig::from_toml_str(&a.to_toml_string()).unwrap();
        assert_eq!(round.config_hash(), a.config_hash());
    }

    #[test]
    fn parse_errors_carry_line() {
        let bad = DEMO.replace("\"mu1 * s^alpha\"", "\"mu1 * s^^alpha\"");
        let ConfigError::Parse(msg) = RunConfig::from_toml_str(&bad).unwrap_err() else { panic!() };
        assert!(msg.contains("line 11"), "{msg}");
        assert!(matches!(
            RunConfig::from_toml_str(&DEMO.replace("dt0 = 1e-3", "dt0 = 1.0")),
            Err(ConfigError::Invalid { field: "time", .. })
        ));
        assert!(RunConfig::from_toml_str(&DEMO.replace("cells = 100", "cells = 100\nbogus = 1")).is_err());
    }

    #[test]
    fn two_bumps_needs_disk() {
        let text = DEMO.replace("\"bump\"", "\"two-bumps\"");
        assert!(RunConfig::from_toml_str(&text).is_err());
        let text = text.replace("cells = 100", "mode = \"tensor2d\"\ncells = 40");
        let cfg = RunConfig::from_toml_str(&text).unwrap();
        let grid = cfg.build_grid().unwrap();
        let u0 = cfg.initial_datum(&grid).unwrap();
        let Grid::Tensor(g) = &grid else { panic!() };
        // Mirror symmetry in x.
        for j in 0..40 {
            for i in 0..40 {
                if let (Some(a), Some(b)) = (g.cell_at(i, j), g.cell_at(39 - i, j)) {
                    assert!((u0[a] - u0[b]).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn expression_profile_and_noise() {
        let text = DEMO.replace("\"bump\"", "\"1 - 0.5 * s^2\"").replace("amplitude = 2.0", "amplitude = 2.0\nnoise = 0.1");
        let cfg = RunConfig::from_toml_str(&text).unwrap();
        let grid = cfg.build_grid().unwrap();
        let u0 = cfg.initial_datum(&grid).unwrap();
        assert_eq!(u0, cfg.initial_datum(&grid).unwrap());
        for (u, r) in u0.iter().zip(grid.radii()) {
            let base = 2.0 * (1.0 - 0.5 * r * r);
            assert!((u - base).abs() <= 0.1 * base + 1e-15);
        }
        let neg = DEMO.replace("\"bump\"", "\"0.5 - s\"");
        let cfg = RunConfig::from_toml_str(&neg).unwrap();
        assert!(matches!(cfg.initial_datum(&cfg.build_grid().unwrap()), Err(ConfigError::InitialDatum { .. })));
    }
}
