//! Numerical laboratory for the parabolic–elliptic Keller–Segel system
//!
//! ```text
//! u_t = Δu − ∇·(u∇v) + κ(|x|)u − μ(|x|)u^p
//!   0 = Δv − v + u^γ
//! ```
//!
//! with homogeneous Neumann conditions on a ball, together with the
//! monitors and analytic oracles used to check the a priori estimates that
//! accompany its global existence theory.
//!
//! Layout:
//! - [`model`]: exponents, coefficient grammar, grids and the admissibility checks.
//! - [`elliptic`]: the signal solve `−Δv + v = u^γ`.
//! - [`evolve`]: positivity preserving time stepping with blow-up detection.
//! - [`norms`]: discrete norms, interpolation, `q*` and the radial weight integral.
//! - [`oracles`]: ODE comparison and Neumann heat semigroup probes.
//! - [`harness`]: configuration files, runs, sweeps and the lemma suite.

pub mod elliptic;
pub mod evolve;
pub mod harness;
pub mod linalg;
pub mod model;
pub mod norms;
pub mod oracles;

pub use elliptic::{signal_gradient, solve_signal, SignalField};
pub use evolve::{detect_blowup, run, SimState, Simulation, Trajectory};
pub use model::{
    mass_bound, sample_coefficients, validate_exponents, AdmissibilityReport, CoefficientField,
    CoefficientSpec, ExponentSet, Grid, RadialGrid, Real, TensorGrid,
};
