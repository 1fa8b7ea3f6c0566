//! The signal equation `0 = Δv − v + u^γ` with zero Neumann flux.
//!
//! The finite-volume form integrates `−Δv + v = f` over each cell, so the
//! discrete system is `(diag(ω) + L) v = ω f` with `L` the face-flux
//! Laplacian. Summing the rows gives `Σ ω_i v_i = Σ ω_i f_i`.

use thiserror::Error;

use crate::linalg::SolverError;
use crate::model::{Grid, RadialGrid};
use crate::norms::integrate;

/// Default relative tolerance for signal solves.
pub const SIGNAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EllipticError {
    #[error("density is negative or not finite at node {index} ({value})")]
    InvalidDensity { index: usize, value: f64 },
    #[error("tolerance must be positive, got {0}")]
    Tolerance(f64),
    #[error("field has {field} entries but the grid has {grid}")]
    Length { field: usize, grid: usize },
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("residual {residual:e} above tolerance {tol:e}")]
    Residual { residual: f64, tol: f64 },
    #[error("compatibility defect {defect:e} exceeds {bound:e}")]
    Compatibility { defect: f64, bound: f64 },
    #[error("signal is negative at node {index} ({value:e})")]
    MaximumPrinciple { index: usize, value: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalField {
    pub v: Vec<f64>,
    pub residual_norm: f64,
    /// `Σ ω_i v_i − Σ ω_i u_i^γ`.
    pub compatibility_defect: f64,
    pub iterations: usize,
}

/// Solves `−Δ_h v + v = f` for an arbitrary forcing.
pub fn solve_forced(f: &[f64], grid: &Grid, tol: f64) -> Result<SignalField, EllipticError> {
    if !(tol > 0.0) {
        return Err(EllipticError::Tolerance(tol));
    }
    if f.len() != grid.len() {
        return Err(EllipticError::Length { field: f.len(), grid: grid.len() });
    }
    let w = grid.weights();
    let rhs: Vec<f64> = f.iter().zip(w).map(|(f, w)| f * w).collect();
    let sol = grid.solve_shifted(w, &rhs, tol)?;
    if !(sol.residual <= tol) {
        return Err(EllipticError::Residual { residual: sol.residual, tol });
    }
    let compatibility_defect = integrate(&sol.x, w) - integrate(f, w);
    Ok(SignalField {
        v: sol.x,
        residual_norm: sol.residual,
        compatibility_defect,
        iterations: sol.iterations,
    })
}

/// Solves `0 = Δv − v + u^γ` and checks the compatibility identity and the
/// maximum principle.
pub fn solve_signal(u: &[f64], grid: &Grid, gamma: f64, tol: f64) -> Result<SignalField, EllipticError> {
    if let Some(index) = u.iter().position(|&x| !(x >= 0.0 && x.is_finite())) {
        return Err(EllipticError::InvalidDensity { index, value: u[index] });
    }
    let f: Vec<f64> = u.iter().map(|&x| if x == 0.0 { 0.0 } else { x.powf(gamma) }).collect();
    let field = solve_forced(&f, grid, tol)?;
    let bound = 10.0 * tol * (1.0 + integrate(&f, grid.weights()));
    if !(field.compatibility_defect.abs() <= bound) {
        return Err(EllipticError::Compatibility { defect: field.compatibility_defect, bound });
    }
    if let Some(index) = field.v.iter().position(|&x| x < -10.0 * tol) {
        return Err(EllipticError::MaximumPrinciple { index, value: field.v[index] });
    }
    Ok(field)
}

/// `∂v/∂r` at all `M + 1` radial faces; the end faces are zero.
pub fn signal_gradient(v: &[f64], grid: &RadialGrid) -> Vec<f64> {
    let dr = grid.dr();
    let mut g = vec![0.0; grid.cells() + 1];
    for k in 1..grid.cells() {
        g[k] = (v[k] - v[k - 1]) / dr;
    }
    g
}

/// `(v_hi − v_lo)/distance` on every interior face of either grid.
pub fn face_gradients(v: &[f64], grid: &Grid) -> Vec<f64> {
    grid.faces().iter().map(|f| (v[f.hi] - v[f.lo]) / f.distance).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TensorGrid;
    use crate::norms::lq_norm;
    use std::f64::consts::PI;

    fn radial(n: u32, r: f64, m: usize) -> Grid {
        RadialGrid::new(n, r, m).unwrap().into()
    }

    #[test]
    fn constants_and_zero() {
        let g = radial(3, 1.0, 64);
        let s = solve_signal(&vec![2.0; 64], &g, 1.5, SIGNAL_TOL).unwrap();
        let c = 2.0f64.powf(1.5);
        assert!(s.v.iter().all(|v| (v - c).abs() < 1e-12 * c));
        let z = solve_signal(&vec![0.0; 64], &g, 1.5, SIGNAL_TOL).unwrap();
        assert!(z.v.iter().all(|&v| v == 0.0));
        let t: Grid = TensorGrid::disk(1.0, 24).unwrap().into();
        let s = solve_signal(&vec![2.0; t.len()], &t, 1.5, SIGNAL_TOL).unwrap();
        assert!(s.v.iter().all(|v| (v - c).abs() < 1e-8 * c));
    }

    #[test]
    fn rejects_bad_input() {
        let g = radial(2, 1.0, 8);
        let mut u = vec![1.0; 8];
        u[2] = -1.0;
        assert!(matches!(solve_signal(&u, &g, 2.0, 1e-10), Err(EllipticError::InvalidDensity { index: 2, .. })));
        assert!(matches!(solve_signal(&[1.0; 8], &g, 2.0, 0.0), Err(EllipticError::Tolerance(_))));
        assert!(solve_signal(&[1.0; 7], &g, 2.0, 1e-10).is_err());
    }

    fn mms_error(n: u32, m: usize) -> (f64, f64) {
        let radius = 1.3;
        let k = PI / radius;
        let grid = RadialGrid::new(n, radius, m).unwrap();
        let exact = |r: f64| (k * r).cos();
        let f: Vec<f64> = grid
            .nodes()
            .iter()
            .map(|&r| (1.0 + k * k) * (k * r).cos() + (n - 1) as f64 / r * k * (k * r).sin())
            .collect();
        let g: Grid = grid.clone().into();
        let s = solve_forced(&f, &g, SIGNAL_TOL).unwrap();
        let err: Vec<f64> = grid.nodes().iter().zip(&s.v).map(|(&r, v)| v - exact(r)).collect();
        let e_v = lq_norm(&err, &grid, 2.0).unwrap();
        let grad = signal_gradient(&s.v, &grid);
        let gerr: Vec<f64> = grid
            .face_positions()
            .iter()
            .zip(&grad)
            .map(|(&r, d)| d + k * (k * r).sin())
            .collect();
        let e_g = gerr.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        (e_v, e_g)
    }

    #[test]
    fn manufactured_solution_second_order() {
        for n in [2, 3] {
            let (a, ga) = mms_error(n, 64);
            let (b, gb) = mms_error(n, 128);
            let (c, gc) = mms_error(n, 256);
            for (coarse, fine) in [(a, b), (b, c)] {
                let order = (coarse / fine).log2();
                assert!(order >= 1.9, "n={n} value order {order}");
            }
            for (coarse, fine) in [(ga, gb), (gb, gc)] {
                let order = (coarse / fine).log2();
                assert!(order >= 1.9, "n={n} gradient order {order}");
            }
        }
    }

    #[test]
    fn gradient_vanishes_at_ends() {
        let grid = RadialGrid::new(2, 1.0, 30).unwrap();
        let v: Vec<f64> = grid.nodes().iter().map(|r| r * r).collect();
        let g = signal_gradient(&v, &grid);
        assert_eq!(g.len(), 31);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[30], 0.0);
        assert!(signal_gradient(&[4.0; 30], &grid).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn compatibility_holds_for_rough_data() {
        let g = radial(4, 2.0, 200);
        let u: Vec<f64> = (0..200).map(|i| ((i * 7919) % 13) as f64).collect();
        let s = solve_signal(&u, &g, 2.5, SIGNAL_TOL).unwrap();
        assert!(s.v.iter().all(|&v| v >= 0.0));
        let t: Grid = TensorGrid::disk(1.0, 40).unwrap().into();
        let u: Vec<f64> = (0..t.len()).map(|i| ((i * 7919) % 13) as f64).collect();
        let s = solve_signal(&u, &t, 2.5, SIGNAL_TOL).unwrap();
        assert!(s.residual_norm <= SIGNAL_TOL);
    }

    /// Spread of `v_2d − v_radial(|x|)` within thin rings, maximised over rings.
    fn angular_spread(side: usize, reference: &RadialGrid, v_ref: &[f64]) -> f64 {
        let disk = TensorGrid::disk(1.0, side).unwrap();
        let u: Vec<f64> = disk.radii().iter().map(|r| 2.0 * (-r * r / 0.08).exp()).collect();
        let g: Grid = disk.clone().into();
        let v = solve_signal(&u, &g, 1.5, SIGNAL_TOL).unwrap().v;
        let interp = |r: f64| {
            let x = r / reference.dr() - 0.5;
            let i = (x.floor().max(0.0) as usize).min(reference.cells() - 2);
            let t = (x - i as f64).clamp(0.0, 1.0);
            v_ref[i] * (1.0 - t) + v_ref[i + 1] * t
        };
        let bins = 8;
        let mut lo = vec![f64::INFINITY; bins];
        let mut hi = vec![f64::NEG_INFINITY; bins];
        for (r, vi) in disk.radii().iter().zip(&v) {
            let b = (r / 0.8 * bins as f64) as usize;
            if b < bins {
                let d = vi - interp(*r);
                lo[b] = lo[b].min(d);
                hi[b] = hi[b].max(d);
            }
        }
        lo.iter().zip(&hi).map(|(l, h)| h - l).fold(0.0, f64::max)
    }

    #[test]
    fn disk_solver_preserves_radial_symmetry_under_refinement() {
        let reference = RadialGrid::new(2, 1.0, 4000).unwrap();
        let u: Vec<f64> = reference.nodes().iter().map(|r| 2.0 * (-r * r / 0.08).exp()).collect();
        let v_ref = solve_signal(&u, &reference.clone().into(), 1.5, SIGNAL_TOL).unwrap().v;
        let spreads: Vec<f64> = [32, 64, 128].iter().map(|&s| angular_spread(s, &reference, &v_ref)).collect();
        assert!(spreads[1] < 0.75 * spreads[0], "{spreads:?}");
        assert!(spreads[2] < 0.75 * spreads[1], "{spreads:?}");
    }
}
