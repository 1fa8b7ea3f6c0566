//! Domain types, coefficient sampling and the admissibility checks.

mod coefficients;
mod exponents;
pub mod expr;
mod grid;
mod real;

use thiserror::Error;

pub use coefficients::{mass_bound, sample_coefficients, CoefficientField, CoefficientSpec};
pub use exponents::{validate_exponents, AdmissibilityReport, Constraint, ExponentSet, NodeViolation};
pub use expr::{Bindings, ExprError, RadialFunction};
pub use grid::{unit_ball_volume, unit_sphere_area, Face, Grid, Quadrature, RadialGrid, TensorGrid};
pub use real::{Real, RealError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("field `{field}` is not finite")]
    NonFinite { field: &'static str },
    #[error("field `{field}` must be positive")]
    NonPositive { field: &'static str },
    #[error("too few cells ({0})")]
    TooFewCells(usize),
    #[error("density is negative at node {index} ({value})")]
    NegativeDensity { index: usize, value: f64 },
    #[error("coefficient check failed at {} node(s), first at r = {}", .0.len(), .0.first().map_or(f64::NAN, |v| v.radius))]
    CoefficientViolation(Vec<NodeViolation>),
}
