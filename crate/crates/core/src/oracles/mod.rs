//! Independent checks of the analytic lemmas: the ODE comparison principle
//! and the smoothing estimates of the Neumann heat semigroup on model
//! domains where its eigenfunctions are explicit.

pub mod heat;
pub mod ode;
pub mod probes;

use thiserror::Error;

pub use heat::{heat_apply, Domain, SemigroupProbe};
pub use ode::{dormand_prince, ode_comparison, OdeReport, OdeWitness};
pub use probes::{semigroup_estimate_probe, structural_checks, ProbeKind, ProbeReport, Verdict};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("integrator failed: {0}")]
    Integrator(String),
    #[error("expected {expected} entries, got {got}")]
    Length { expected: usize, got: usize },
}
