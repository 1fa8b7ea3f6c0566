//! Adaptive Dormand–Prince integration and the ODE comparison check for
//! `y' + c₁ y^α ≤ c₂`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::OracleError;

/// Absolute slack allowed over the comparison bound.
pub const COMPARISON_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rtol: 1e-11, atol: 1e-13, max_steps: 5_000_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegrationStats {
    pub y_end: f64,
    pub accepted: usize,
    pub rejected: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights (equal to the last row of `A`).
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates the scalar equation `y' = f(t, y)` from `t0` to `t_end`,
/// calling `observe(t, y)` after every accepted step.
pub fn dormand_prince<F, O>(
    f: F,
    t0: f64,
    y0: f64,
    t_end: f64,
    tol: Tolerances,
    mut observe: O,
) -> Result<IntegrationStats, OracleError>
where
    F: Fn(f64, f64) -> f64,
    O: FnMut(f64, f64),
{
    let (mut t, mut y) = (t0, y0);
    let span = t_end - t0;
    if !(span >= 0.0) {
        return Err(OracleError::Integrator(format!("empty interval [{t0}, {t_end}]")));
    }
    let mut h = (span * 1e-3).max(1e-12);
    let (mut accepted, mut rejected) = (0, 0);
    let mut k = [0.0; 7];
    k[0] = f(t, y);
    while t < t_end {
        if accepted + rejected >= tol.max_steps {
            return Err(OracleError::Integrator(format!("step limit reached at t = {t}")));
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        for s in 1..7 {
            let inc: f64 = (0..s).map(|j| A[s][j] * k[j]).sum();
            k[s] = f(t + C[s] * h, y + h * inc);
        }
        let y5 = y + h * (0..7).map(|j| B5[j] * k[j]).sum::<f64>();
        let y4 = y + h * (0..7).map(|j| B4[j] * k[j]).sum::<f64>();
        let scale = tol.atol + tol.rtol * y.abs().max(y5.abs());
        let err = ((y5 - y4) / scale).abs();
        if !err.is_finite() || !y5.is_finite() {
            rejected += 1;
            h *= 0.1;
            if h < 1e-300 {
                return Err(OracleError::Integrator(format!("step size underflow at t = {t}")));
            }
            continue;
        }
        if err <= 1.0 {
            t = if last { t_end } else { t + h };
            y = y5;
            k[0] = k[6];
            accepted += 1;
            observe(t, y);
        } else {
            rejected += 1;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    Ok(IntegrationStats { y_end: y, accepted, rejected })
}

/// The extremal case `y' = c₂ − c₁ y^α` of the comparison lemma.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OdeWitness {
    pub c1: f64,
    pub c2: f64,
    pub alpha_exp: f64,
    pub y0: f64,
    /// `max{y₀, (c₂/c₁)^{1/α}}`.
    pub bound: f64,
}

impl OdeWitness {
    pub fn new(c1: f64, c2: f64, alpha_exp: f64, y0: f64) -> Result<Self, OracleError> {
        if !(c1 > 0.0 && c2 > 0.0 && c1.is_finite() && c2.is_finite()) {
            return Err(OracleError::Precondition("c1 and c2 must be positive".into()));
        }
        if !(alpha_exp >= 1.0 && alpha_exp.is_finite()) {
            return Err(OracleError::Precondition(format!("exponent {alpha_exp} is below 1")));
        }
        if !(y0 >= 0.0 && y0.is_finite()) {
            return Err(OracleError::Precondition(format!("y0 = {y0} is negative")));
        }
        Ok(Self { c1, c2, alpha_exp, y0, bound: y0.max(Self::equilibrium_of(c1, c2, alpha_exp)) })
    }

    fn equilibrium_of(c1: f64, c2: f64, alpha: f64) -> f64 {
        (c2 / c1).powf(1.0 / alpha)
    }

    pub fn equilibrium(&self) -> f64 {
        Self::equilibrium_of(self.c1, self.c2, self.alpha_exp)
    }

    /// Log-uniform `c₁, c₂ ∈ [10⁻², 10²]`, uniform `α ∈ [1, 4]`, `y₀ ∈ [0, 10]`.
    pub fn random_suite(seed: u64, count: usize) -> Vec<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let c1 = 10f64.powf(rng.gen_range(-2.0..=2.0));
                let c2 = 10f64.powf(rng.gen_range(-2.0..=2.0));
                let alpha = rng.gen_range(1.0..=4.0);
                let y0 = rng.gen_range(0.0..=10.0);
                Self::new(c1, c2, alpha, y0).expect("sampled witnesses satisfy the preconditions")
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OdeReport {
    pub max_y: f64,
    pub bound: f64,
    pub holds: bool,
    pub steps: usize,
}

/// Integrates the witness over `[0, horizon]` and compares `max_t y(t)`
/// with the bound.
pub fn ode_comparison(w: &OdeWitness, horizon: f64) -> Result<OdeReport, OracleError> {
    let (c1, c2, a) = (w.c1, w.c2, w.alpha_exp);
    let mut max_y = w.y0;
    let stats = dormand_prince(
        |_, y| c2 - c1 * y.max(0.0).powf(a),
        0.0,
        w.y0,
        horizon,
        Tolerances::default(),
        |_, y| max_y = max_y.max(y),
    )?;
    Ok(OdeReport {
        max_y,
        bound: w.bound,
        holds: max_y <= w.bound + COMPARISON_SLACK,
        steps: stats.accepted,
    })
}
