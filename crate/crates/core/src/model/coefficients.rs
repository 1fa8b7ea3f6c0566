use serde::{Deserialize, Serialize};

use super::exponents::{Constraint, NodeViolation};
use super::expr::{Bindings, RadialFunction};
use super::grid::Grid;
use super::ModelError;

/// Radial growth and decay coefficients `κ(|x|)`, `μ(|x|)` with the lower
/// bound constant `μ₁`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSpec {
    pub kappa: RadialFunction,
    pub mu: RadialFunction,
    pub mu1: f64,
    pub radius: f64,
}

/// Coefficients sampled at grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    pub kappa: Vec<f64>,
    pub mu: Vec<f64>,
    pub mu1: f64,
    pub alpha: f64,
    /// `μ_i ≥ μ₁ r_iᵅ` at each node.
    pub lower_bound_holds: Vec<bool>,
}

impl CoefficientField {
    /// Samples without rejecting; see [`CoefficientField::violations`].
    pub fn sample(spec: &CoefficientSpec, grid: &Grid, alpha: f64) -> Self {
        let bindings = Bindings { mu1: spec.mu1, alpha };
        let radii = grid.radii();
        let kappa: Vec<f64> = radii.iter().map(|&r| spec.kappa.eval(r, &bindings)).collect();
        let mu: Vec<f64> = radii.iter().map(|&r| spec.mu.eval(r, &bindings)).collect();
        let lower_bound_holds = radii
            .iter()
            .zip(&mu)
            .map(|(&r, &m)| m >= spec.mu1 * r.powf(alpha))
            .collect();
        Self { kappa, mu, mu1: spec.mu1, alpha, lower_bound_holds }
    }

    /// Uniform coefficients, bypassing the expression layer.
    pub fn uniform(len: usize, kappa: f64, mu: f64, mu1: f64, alpha: f64) -> Self {
        Self {
            kappa: vec![kappa; len],
            mu: vec![mu; len],
            mu1,
            alpha,
            lower_bound_holds: vec![true; len],
        }
    }

    pub fn violations(&self, grid: &Grid) -> Vec<NodeViolation> {
        let mut out = Vec::new();
        for (i, &r) in grid.radii().iter().enumerate() {
            let (k, m) = (self.kappa[i], self.mu[i]);
            if !(k >= 0.0) {
                out.push(NodeViolation {
                    index: i,
                    radius: r,
                    constraint: Constraint::KappaNonnegative,
                    value: k,
                    required: 0.0,
                });
            }
            if !(m >= 0.0) {
                out.push(NodeViolation {
                    index: i,
                    radius: r,
                    constraint: Constraint::MuNonnegative,
                    value: m,
                    required: 0.0,
                });
            }
            if !self.lower_bound_holds[i] {
                out.push(NodeViolation {
                    index: i,
                    radius: r,
                    constraint: Constraint::MuLowerBound,
                    value: m,
                    required: self.mu1 * r.powf(self.alpha),
                });
            }
        }
        out
    }

    /// `k₁ = max_i κ_i`.
    pub fn kappa_sup(&self) -> f64 {
        self.kappa.iter().copied().fold(0.0, f64::max)
    }
}

/// Samples `κ`, `μ` at the grid nodes and checks `κ, μ ≥ 0` and
/// `μ(r_i) ≥ μ₁ r_iᵅ` node by node.
pub fn sample_coefficients(
    spec: &CoefficientSpec,
    grid: &Grid,
    alpha: f64,
) -> Result<CoefficientField, ModelError> {
    if !(spec.mu1 > 0.0 && spec.mu1.is_finite()) {
        return Err(ModelError::NonPositive { field: "mu1" });
    }
    let field = CoefficientField::sample(spec, grid, alpha);
    let violations = field.violations(grid);
    if violations.is_empty() {
        Ok(field)
    } else {
        Err(ModelError::CoefficientViolation(violations))
    }
}

/// `K = max{∫u₀, k₁/μ₁·|Ω|}` with `k₁ = sup κ` over the nodes.
pub fn mass_bound(u0: &[f64], grid: &Grid, field: &CoefficientField) -> Result<f64, ModelError> {
    if let Some(index) = u0.iter().position(|&u| !(u >= 0.0)) {
        return Err(ModelError::NegativeDensity { index, value: u0[index] });
    }
    let mass = crate::norms::integrate(u0, grid.weights());
    let logistic = field.kappa_sup() / field.mu1 * grid.measure();
    Ok(mass.max(logistic))
}
