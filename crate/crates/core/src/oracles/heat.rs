//! Neumann heat semigroup on an interval or rectangle by cosine series.
//!
//! Fields are sampled at the `N` cell centres `x_j = (j + ½)L/N` of each
//! axis. The DCT-II of the samples gives the coefficients of the cosine
//! interpolant, which is evolved exactly: mode `k` is damped by
//! `exp(−(kπ/L)² t)`. Gradients of cosine series are sine series and are
//! evaluated with the DST-III; divergences of sine-type vector fields come
//! back to cosine series.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustdct::{DctPlanner, TransformType2And3};

use super::OracleError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Interval { length: f64 },
    Rectangle { lx: f64, ly: f64 },
}

#[derive(Clone)]
pub struct SemigroupProbe {
    pub domain: Domain,
    /// Samples (and cosine modes) per axis.
    pub modes: usize,
    /// First nonzero Neumann eigenvalue.
    pub lambda1: f64,
    /// Multiplies every eigenvalue in the damping factors; 1 is correct.
    #[doc(hidden)]
    pub damping_scale: f64,
    plan: Arc<dyn TransformType2And3<f64>>,
}

impl fmt::Debug for SemigroupProbe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SemigroupProbe")
            .field("domain", &self.domain)
            .field("modes", &self.modes)
            .field("lambda1", &self.lambda1)
            .finish()
    }
}

#[derive(Clone, Copy)]
enum Basis {
    Cos,
    Sin,
}

impl SemigroupProbe {
    pub fn interval(length: f64, modes: usize) -> Result<Self, OracleError> {
        Self::build(Domain::Interval { length }, modes)
    }

    pub fn rectangle(lx: f64, ly: f64, modes: usize) -> Result<Self, OracleError> {
        Self::build(Domain::Rectangle { lx, ly }, modes)
    }

    fn build(domain: Domain, modes: usize) -> Result<Self, OracleError> {
        if modes < 8 {
            return Err(OracleError::Precondition(format!("need at least 8 modes, got {modes}")));
        }
        let (lx, ly) = match domain {
            Domain::Interval { length } => (length, length),
            Domain::Rectangle { lx, ly } => (lx, ly),
        };
        if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
            return Err(OracleError::Precondition("side lengths must be positive".into()));
        }
        let longest = lx.max(ly);
        let plan = DctPlanner::new().plan_dct2(modes);
        Ok(Self { domain, modes, lambda1: (PI / longest).powi(2), damping_scale: 1.0, plan })
    }

    pub fn dim(&self) -> usize {
        match self.domain {
            Domain::Interval { .. } => 1,
            Domain::Rectangle { .. } => 2,
        }
    }

    /// Side lengths `(Lx, Ly)`; `Ly = 1` with a single row on the interval.
    pub fn sides(&self) -> (f64, f64) {
        match self.domain {
            Domain::Interval { length } => (length, 1.0),
            Domain::Rectangle { lx, ly } => (lx, ly),
        }
    }

    fn rows(&self) -> usize {
        if self.dim() == 1 {
            1
        } else {
            self.modes
        }
    }

    /// Number of samples in a scalar field, row-major with `x` fastest.
    pub fn len(&self) -> usize {
        self.modes * self.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn measure(&self) -> f64 {
        let (lx, ly) = self.sides();
        match self.domain {
            Domain::Interval { .. } => lx,
            Domain::Rectangle { .. } => lx * ly,
        }
    }

    pub fn cell_measure(&self) -> f64 {
        self.measure() / self.len() as f64
    }

    /// Sample coordinates along the `x` axis and the `y` axis.
    pub fn axes(&self) -> (Vec<f64>, Vec<f64>) {
        let (lx, ly) = self.sides();
        let n = self.modes;
        let axis = |l: f64| (0..n).map(|j| (j as f64 + 0.5) * l / n as f64).collect::<Vec<_>>();
        let ys = if self.dim() == 1 { vec![0.0] } else { axis(ly) };
        (axis(lx), ys)
    }

    /// Coordinates of every sample in storage order.
    pub fn points(&self) -> Vec<[f64; 2]> {
        let (xs, ys) = self.axes();
        ys.iter().flat_map(|&y| xs.iter().map(move |&x| [x, y])).collect()
    }

    fn check_len(&self, w: &[f64]) -> Result<(), OracleError> {
        if w.len() != self.len() {
            return Err(OracleError::Length { expected: self.len(), got: w.len() });
        }
        Ok(())
    }

    /// Applies a 1D operation along `x` (axis 0) or `y` (axis 1).
    fn along(&self, data: &mut [f64], axis: usize, mut op: impl FnMut(&mut [f64])) {
        let n = self.modes;
        if axis == 0 {
            data.chunks_mut(n).for_each(op);
        } else if self.dim() == 2 {
            let mut col = vec![0.0; n];
            for i in 0..n {
                for j in 0..n {
                    col[j] = data[j * n + i];
                }
                op(&mut col);
                for j in 0..n {
                    data[j * n + i] = col[j];
                }
            }
        }
    }

    /// Samples to series coefficients along one axis.
    fn analyse(&self, data: &mut [f64], axis: usize, basis: Basis) {
        let n = self.modes as f64;
        let plan = &self.plan;
        self.along(data, axis, |b| match basis {
            Basis::Cos => {
                plan.process_dct2(b);
                b[0] /= n;
                b[1..].iter_mut().for_each(|x| *x *= 2.0 / n);
            }
            Basis::Sin => {
                plan.process_dst2(b);
                let last = b.len() - 1;
                b[..last].iter_mut().for_each(|x| *x *= 2.0 / n);
                b[last] /= n;
            }
        });
    }

    /// Series coefficients to samples along one axis.
    fn synthesise(&self, data: &mut [f64], axis: usize, basis: Basis) {
        let plan = &self.plan;
        self.along(data, axis, |b| match basis {
            Basis::Cos => {
                b[0] *= 2.0;
                plan.process_dct3(b);
            }
            Basis::Sin => {
                let last = b.len() - 1;
                b[last] *= 2.0;
                plan.process_dst3(b);
            }
        });
    }

    fn wavenumbers(&self) -> (Vec<f64>, Vec<f64>) {
        let (lx, ly) = self.sides();
        let k = |l: f64| (0..self.modes).map(|m| m as f64 * PI / l).collect::<Vec<_>>();
        let ky = if self.dim() == 1 { vec![0.0] } else { k(ly) };
        (k(lx), ky)
    }

    /// Cosine coefficients of `w`, indexed like the samples.
    pub fn cosine_coefficients(&self, w: &[f64]) -> Result<Vec<f64>, OracleError> {
        self.check_len(w)?;
        let mut c = w.to_vec();
        self.analyse(&mut c, 0, Basis::Cos);
        self.analyse(&mut c, 1, Basis::Cos);
        Ok(c)
    }

    fn damp(&self, c: &mut [f64], t: f64) {
        let (kx, ky) = self.wavenumbers();
        let n = self.modes;
        for (j, row) in c.chunks_mut(n).enumerate() {
            for (i, a) in row.iter_mut().enumerate() {
                let lambda = kx[i] * kx[i] + ky[j] * ky[j];
                *a *= (-self.damping_scale * lambda * t).exp();
            }
        }
    }

    fn check_time(t: f64) -> Result<(), OracleError> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(OracleError::Precondition(format!("time {t} must be nonnegative")));
        }
        Ok(())
    }

    /// `e^{tΔ} w`.
    pub fn heat_apply(&self, w: &[f64], t: f64) -> Result<Vec<f64>, OracleError> {
        Self::check_time(t)?;
        let mut c = self.cosine_coefficients(w)?;
        self.damp(&mut c, t);
        self.synthesise(&mut c, 0, Basis::Cos);
        self.synthesise(&mut c, 1, Basis::Cos);
        Ok(c)
    }

    /// `e^{tΔ} w` with the constant mode removed exactly.
    pub fn heat_apply_mean_free(&self, w: &[f64], t: f64) -> Result<Vec<f64>, OracleError> {
        Self::check_time(t)?;
        let mut c = self.cosine_coefficients(w)?;
        c[0] = 0.0;
        self.damp(&mut c, t);
        self.synthesise(&mut c, 0, Basis::Cos);
        self.synthesise(&mut c, 1, Basis::Cos);
        Ok(c)
    }

    /// Components of `∇ e^{tΔ} w`; `t = 0` gives the gradient of the
    /// cosine interpolant of `w`.
    pub fn heat_gradient(&self, w: &[f64], t: f64) -> Result<Vec<Vec<f64>>, OracleError> {
        Self::check_time(t)?;
        let mut c = self.cosine_coefficients(w)?;
        self.damp(&mut c, t);
        let (kx, ky) = self.wavenumbers();
        let n = self.modes;
        // ∂x cos(kx) = −k sin(kx); sine mode k sits at index k − 1.
        let mut gx = vec![0.0; c.len()];
        for (src, dst) in c.chunks(n).zip(gx.chunks_mut(n)) {
            for m in 1..n {
                dst[m - 1] = -kx[m] * src[m];
            }
        }
        self.synthesise(&mut gx, 0, Basis::Sin);
        self.synthesise(&mut gx, 1, Basis::Cos);
        if self.dim() == 1 {
            return Ok(vec![gx]);
        }
        let mut gy = vec![0.0; c.len()];
        for m in 1..n {
            for i in 0..n {
                gy[(m - 1) * n + i] = -ky[m] * c[m * n + i];
            }
        }
        self.synthesise(&mut gy, 0, Basis::Cos);
        self.synthesise(&mut gy, 1, Basis::Sin);
        Ok(vec![gx, gy])
    }

    /// `e^{tΔ} ∇·w` for a vector field whose normal component vanishes on
    /// the boundary: component `d` is a sine series along axis `d` and a
    /// cosine series along the other axis.
    pub fn heat_divergence(&self, w: &[Vec<f64>], t: f64) -> Result<Vec<f64>, OracleError> {
        Self::check_time(t)?;
        if w.len() != self.dim() {
            return Err(OracleError::Length { expected: self.dim(), got: w.len() });
        }
        let (kx, ky) = self.wavenumbers();
        let n = self.modes;
        let mut div = vec![0.0; self.len()];
        for (axis, comp) in w.iter().enumerate() {
            self.check_len(comp)?;
            let mut c = comp.clone();
            let (bx, by) = if axis == 0 { (Basis::Sin, Basis::Cos) } else { (Basis::Cos, Basis::Sin) };
            self.analyse(&mut c, 0, bx);
            self.analyse(&mut c, 1, by);
            // ∂ sin(kx) = k cos(kx); the top sine mode has no cosine partner
            // among the samples and vanishes there.
            for j in 0..self.rows() {
                for i in 0..n {
                    let (src, k) = match axis {
                        0 if i >= 1 => (c[j * n + i - 1], kx[i]),
                        1 if j >= 1 => (c[(j - 1) * n + i], ky[j]),
                        _ => continue,
                    };
                    div[j * n + i] += k * src;
                }
            }
        }
        self.damp(&mut div, t);
        self.synthesise(&mut div, 0, Basis::Cos);
        self.synthesise(&mut div, 1, Basis::Cos);
        Ok(div)
    }

    /// Discrete `L^p` norm with the midpoint weights; `p = ∞` is the max.
    pub fn norm(&self, f: &[f64], p: f64) -> f64 {
        let max = f.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if p.is_infinite() || max == 0.0 {
            return max;
        }
        let h = self.cell_measure();
        let s: f64 = f.iter().map(|x| (x.abs() / max).powf(p)).sum();
        max * (h * s).powf(1.0 / p)
    }

    /// `L^p` norm of the pointwise Euclidean length of a vector field.
    pub fn vector_norm(&self, comps: &[Vec<f64>], p: f64) -> f64 {
        let len: Vec<f64> = (0..self.len())
            .map(|i| comps.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt())
            .collect();
        self.norm(&len, p)
    }

    pub fn mean(&self, f: &[f64]) -> f64 {
        f.iter().sum::<f64>() / f.len() as f64
    }
}

/// `e^{tΔ} w` on the probe's model domain.
pub fn heat_apply(w: &[f64], t: f64, probe: &SemigroupProbe) -> Result<Vec<f64>, OracleError> {
    probe.heat_apply(w, t)
}
