//! Finite-volume grids on the ball `B_R ⊂ ℝⁿ`.
//!
//! [`RadialGrid`] reduces a radially symmetric problem to `[0, R]` with
//! cell-centred nodes and exact shell volumes. [`TensorGrid`] covers the disk
//! `B_R ⊂ ℝ²` with the active cells of a uniform square lattice, for
//! non-radial data. Both are described to the solvers as a list of cell
//! volumes and interior faces; a missing face is a zero-flux boundary.

use std::f64::consts::PI;

use crate::linalg::{self, LinearSolution, SolverError};

use super::ModelError;

/// Volume of the unit ball in ℝⁿ.
pub fn unit_ball_volume(n: u32) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / n as f64 * unit_ball_volume(n - 2),
    }
}

/// Surface area of the unit sphere `S^{n−1}`.
pub fn unit_sphere_area(n: u32) -> f64 {
    n as f64 * unit_ball_volume(n)
}

/// An interior face between cells `lo` and `hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Face {
    pub lo: usize,
    pub hi: usize,
    pub area: f64,
    /// Distance between the two cell centres.
    pub distance: f64,
}

impl Face {
    /// `area / distance`, the two-point flux coefficient.
    pub fn transmissibility(&self) -> f64 {
        self.area / self.distance
    }
}

/// Discrete measure used by the norm routines.
pub trait Quadrature {
    fn weights(&self) -> &[f64];
}

impl Quadrature for [f64] {
    fn weights(&self) -> &[f64] {
        self
    }
}

impl Quadrature for Vec<f64> {
    fn weights(&self) -> &[f64] {
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    n: u32,
    radius: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    faces: Vec<Face>,
}

impl RadialGrid {
    pub fn new(n: u32, radius: f64, cells: usize) -> Result<Self, ModelError> {
        if n == 0 {
            return Err(ModelError::NonPositive { field: "n" });
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(ModelError::NonPositive { field: "radius" });
        }
        if cells < 2 {
            return Err(ModelError::TooFewCells(cells));
        }
        let dr = radius / cells as f64;
        let sphere = unit_sphere_area(n);
        let ni = n as i32;
        let edge = |k: usize| k as f64 * dr;
        let nodes = (0..cells).map(|i| (i as f64 + 0.5) * dr).collect();
        let weights = (0..cells)
            .map(|i| sphere * (edge(i + 1).powi(ni) - edge(i).powi(ni)) / n as f64)
            .collect();
        let faces = (0..cells - 1)
            .map(|i| Face {
                lo: i,
                hi: i + 1,
                area: sphere * edge(i + 1).powi(ni - 1),
                distance: dr,
            })
            .collect();
        Ok(Self { n, radius, nodes, weights, faces })
    }

    pub fn dim(&self) -> u32 {
        self.n
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn cells(&self) -> usize {
        self.nodes.len()
    }

    pub fn dr(&self) -> f64 {
        self.radius / self.cells() as f64
    }

    /// Cell centres `r_i = (i + ½)Δr`.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Shell volumes `|S^{n−1}|(r_{i+½}ⁿ − r_{i−½}ⁿ)/n`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Interior faces, `faces()[i]` sits at `r = (i + 1)Δr`.
    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    /// Radii of all `M + 1` face positions, including `0` and `R`.
    pub fn face_positions(&self) -> Vec<f64> {
        (0..=self.cells()).map(|k| k as f64 * self.dr()).collect()
    }

    /// `|B_R|`.
    pub fn ball_volume(&self) -> f64 {
        unit_ball_volume(self.n) * self.radius.powi(self.n as i32)
    }
}

impl Quadrature for RadialGrid {
    fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Active cells of an `m × m` lattice on `[−R, R]²` whose centres lie in `B_R`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorGrid {
    radius: f64,
    side: usize,
    centers: Vec<[f64; 2]>,
    radii: Vec<f64>,
    weights: Vec<f64>,
    faces: Vec<Face>,
    lattice: Vec<Option<usize>>,
}

impl TensorGrid {
    pub fn disk(radius: f64, side: usize) -> Result<Self, ModelError> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(ModelError::NonPositive { field: "radius" });
        }
        if side < 4 {
            return Err(ModelError::TooFewCells(side));
        }
        let h = 2.0 * radius / side as f64;
        let coord = |k: usize| -radius + (k as f64 + 0.5) * h;
        let mut lattice = vec![None; side * side];
        let mut centers = Vec::new();
        for j in 0..side {
            for i in 0..side {
                let (x, y) = (coord(i), coord(j));
                if x.hypot(y) < radius {
                    lattice[j * side + i] = Some(centers.len());
                    centers.push([x, y]);
                }
            }
        }
        let mut faces = Vec::new();
        for j in 0..side {
            for i in 0..side {
                let Some(a) = lattice[j * side + i] else { continue };
                if i + 1 < side {
                    if let Some(b) = lattice[j * side + i + 1] {
                        faces.push(Face { lo: a, hi: b, area: h, distance: h });
                    }
                }
                if j + 1 < side {
                    if let Some(b) = lattice[(j + 1) * side + i] {
                        faces.push(Face { lo: a, hi: b, area: h, distance: h });
                    }
                }
            }
        }
        let radii = centers.iter().map(|c| c[0].hypot(c[1])).collect();
        let weights = vec![h * h; centers.len()];
        Ok(Self { radius, side, centers, radii, weights, faces, lattice })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.radius / self.side as f64
    }

    pub fn centers(&self) -> &[[f64; 2]] {
        &self.centers
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    /// Active cell index at lattice position `(i, j)`, if inside the disk.
    pub fn cell_at(&self, i: usize, j: usize) -> Option<usize> {
        self.lattice.get(j * self.side + i).copied().flatten()
    }
}

impl Quadrature for TensorGrid {
    fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Either discretisation, as seen by the solvers.
#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    Radial(RadialGrid),
    Tensor(TensorGrid),
}

impl From<RadialGrid> for Grid {
    fn from(g: RadialGrid) -> Self {
        Grid::Radial(g)
    }
}

impl From<TensorGrid> for Grid {
    fn from(g: TensorGrid) -> Self {
        Grid::Tensor(g)
    }
}

impl Grid {
    pub fn dim(&self) -> u32 {
        match self {
            Grid::Radial(g) => g.dim(),
            Grid::Tensor(_) => 2,
        }
    }

    pub fn len(&self) -> usize {
        self.weights().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn radius(&self) -> f64 {
        match self {
            Grid::Radial(g) => g.radius(),
            Grid::Tensor(g) => g.radius(),
        }
    }

    /// `|x|` at each cell centre.
    pub fn radii(&self) -> &[f64] {
        match self {
            Grid::Radial(g) => g.nodes(),
            Grid::Tensor(g) => g.radii(),
        }
    }

    pub fn weights(&self) -> &[f64] {
        match self {
            Grid::Radial(g) => g.weights(),
            Grid::Tensor(g) => g.weights(),
        }
    }

    pub fn faces(&self) -> &[Face] {
        match self {
            Grid::Radial(g) => g.faces(),
            Grid::Tensor(g) => g.faces(),
        }
    }

    /// Smallest centre-to-centre distance.
    pub fn spacing(&self) -> f64 {
        match self {
            Grid::Radial(g) => g.dr(),
            Grid::Tensor(g) => g.spacing(),
        }
    }

    /// `|Ω|` under the discrete measure.
    pub fn measure(&self) -> f64 {
        crate::norms::integrate(&vec![1.0; self.len()], self.weights())
    }

    /// `(A x)_i = shift_i x_i + Σ_faces T_f (x_i − x_j)`.
    pub fn apply_shifted(&self, shift: &[f64], x: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = shift.iter().zip(x).map(|(s, xi)| s * xi).collect();
        for f in self.faces() {
            let flux = f.transmissibility() * (x[f.lo] - x[f.hi]);
            y[f.lo] += flux;
            y[f.hi] -= flux;
        }
        y
    }

    /// Solves `(diag(shift) − Δ_h) x = rhs` where `−Δ_h` is the
    /// zero-flux finite-volume Laplacian scaled by cell volume. Radial
    /// grids use the tridiagonal algorithm; tensor grids use
    /// Jacobi-preconditioned conjugate gradients to relative tolerance `tol`.
    /// The reported residual is the normwise backward error.
    pub fn solve_shifted(
        &self,
        shift: &[f64],
        rhs: &[f64],
        tol: f64,
    ) -> Result<LinearSolution, SolverError> {
        let n = self.len();
        if shift.len() != n || rhs.len() != n {
            return Err(SolverError::Dimension(format!(
                "grid {n}, shift {}, rhs {}",
                shift.len(),
                rhs.len()
            )));
        }
        let mut diag = shift.to_vec();
        for f in self.faces() {
            let t = f.transmissibility();
            diag[f.lo] += t;
            diag[f.hi] += t;
        }
        // Row sums of |A| are shift + 2 Σ T = 2 diag − shift.
        let a_norm = diag.iter().zip(shift).map(|(d, s)| 2.0 * d - s).fold(0.0, f64::max);
        let mut sol = match self {
            Grid::Radial(g) => {
                let off: Vec<f64> = g.faces().iter().map(|f| -f.transmissibility()).collect();
                let x = linalg::thomas(&off, &diag, &off, rhs)?;
                LinearSolution { x, iterations: 1, residual: 0.0 }
            }
            Grid::Tensor(_) => {
                let max_iter = 20 * n + 100;
                let mut sol =
                    linalg::pcg(|x| self.apply_shifted(shift, x), &diag, rhs, tol, max_iter)?;
                // Remove the residual's total, the only part of it that is not
                // flux-balanced, by a uniform shift of the solution.
                let total_shift: f64 = shift.iter().sum();
                if total_shift > 0.0 {
                    let r = self.apply_shifted(shift, &sol.x);
                    let defect: f64 = r.iter().zip(rhs).map(|(a, b)| a - b).sum();
                    let delta = defect / total_shift;
                    sol.x.iter_mut().for_each(|x| *x -= delta);
                }
                sol
            }
        };
        sol.residual = linalg::backward_error(&self.apply_shifted(shift, &sol.x), rhs, &sol.x, a_norm);
        Ok(sol)
    }
}

impl Quadrature for Grid {
    fn weights(&self) -> &[f64] {
        Grid::weights(self)
    }
}
