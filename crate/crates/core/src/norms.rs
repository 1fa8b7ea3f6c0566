//! Discrete integrals and norms on weighted grids.
//!
//! All quadrature goes through [`KahanSum`]; the monitored norms feed
//! pass/fail tolerances.

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::model::{Quadrature, Real};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NormError {
    #[error("norm exponent {0} is below 1")]
    ExponentBelowOne(f64),
    #[error("interpolation exponents must satisfy 1 ≤ s ≤ r ≤ t ≤ ∞, got ({s}, {r}, {t})")]
    ExponentOrder { s: f64, r: f64, t: f64 },
    #[error("field has {field} entries but the grid has {grid}")]
    Length { field: usize, grid: usize },
    #[error("weight integral requires p > γ + 1")]
    PBelowGammaPlusOne,
}

/// Neumaier's compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = KahanSum::new();
        iter.into_iter().for_each(|x| s.add(x));
        s
    }
}

/// `Σ ω_i u_i`.
pub fn integrate(u: &[f64], weights: &[f64]) -> f64 {
    u.iter().zip(weights).map(|(u, w)| u * w).collect::<KahanSum>().value()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormReport {
    /// May be `f64::INFINITY`.
    pub q: f64,
    pub value: f64,
}

fn check_len<Q: Quadrature + ?Sized>(u: &[f64], grid: &Q) -> Result<(), NormError> {
    let grid = grid.weights().len();
    if u.len() != grid {
        return Err(NormError::Length { field: u.len(), grid });
    }
    Ok(())
}

/// `(Σ ω_i |u_i|^q)^{1/q}`, or `max_i |u_i|` for `q = ∞`.
pub fn lq_norm<Q: Quadrature + ?Sized>(u: &[f64], grid: &Q, q: f64) -> Result<f64, NormError> {
    if !(q >= 1.0) {
        return Err(NormError::ExponentBelowOne(q));
    }
    check_len(u, grid)?;
    let max = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if q.is_infinite() || max == 0.0 {
        return Ok(max);
    }
    // Scaling by the max keeps |u|^q away from under- and overflow.
    let sum = u
        .iter()
        .zip(grid.weights())
        .map(|(u, w)| w * (u.abs() / max).powf(q))
        .collect::<KahanSum>()
        .value();
    Ok(max * sum.powf(1.0 / q))
}

pub fn norm_report<Q: Quadrature + ?Sized>(u: &[f64], grid: &Q, q: f64) -> Result<NormReport, NormError> {
    Ok(NormReport { q, value: lq_norm(u, grid, q)? })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InterpolationCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub theta: f64,
}

/// Relative slack allowed in [`interpolation_check`].
pub const INTERPOLATION_SLACK: f64 = 1e-12;

fn recip(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        1.0 / x
    }
}

/// Checks `‖u‖_r ≤ ‖u‖_s^θ ‖u‖_t^{1−θ}` with `1/r = θ/s + (1−θ)/t`.
/// When `s = t` the identity leaves θ free and θ = 1 is used.
pub fn interpolation_check<Q: Quadrature + ?Sized>(
    u: &[f64],
    grid: &Q,
    s: f64,
    r: f64,
    t: f64,
) -> Result<InterpolationCheck, NormError> {
    if !(1.0 <= s && s <= r && r <= t) {
        return Err(NormError::ExponentOrder { s, r, t });
    }
    let theta = if s == t { 1.0 } else { (recip(r) - recip(t)) / (recip(s) - recip(t)) };
    let lhs = lq_norm(u, grid, r)?;
    let ns = lq_norm(u, grid, s)?;
    let nt = lq_norm(u, grid, t)?;
    let rhs = ns.powf(theta) * nt.powf(1.0 - theta);
    Ok(InterpolationCheck { lhs, rhs, holds: lhs <= rhs * (1.0 + INTERPOLATION_SLACK), theta })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum QStar {
    Defined { value: f64 },
    Undefined { denominator: f64, reason: String },
}

impl QStar {
    pub fn value(&self) -> Option<f64> {
        match self {
            QStar::Defined { value } => Some(*value),
            QStar::Undefined { .. } => None,
        }
    }

    /// The open range `(n, q*)` for the gradient exponent, if nonempty.
    pub fn gradient_range(&self, n: u32) -> Option<(f64, f64)> {
        self.value().filter(|&v| v > n as f64).map(|v| (n as f64, v))
    }
}

/// `q* = nq/(nγ − q)`, defined for `nγ/2 < q < nγ`.
pub fn qstar(n: u32, gamma: f64, q: f64) -> QStar {
    let ng = n as f64 * gamma;
    let denominator = ng - q;
    if !(q > ng / 2.0) {
        return QStar::Undefined {
            denominator,
            reason: format!("requires q > nγ/2 = {}", ng / 2.0),
        };
    }
    if denominator <= 0.0 {
        return QStar::Undefined {
            denominator,
            reason: format!("denominator nγ − q = {denominator} is not positive"),
        };
    }
    QStar::Defined { value: n as f64 * q / denominator }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum WeightIntegral {
    Finite { beta: f64, value: f64 },
    Divergent { beta: f64 },
}

impl WeightIntegral {
    pub fn is_finite(&self) -> bool {
        matches!(self, WeightIntegral::Finite { .. })
    }
}

/// `∫₀^R r^{1−β} dr` with `β = α(q+γ)/(p−1−γ)`: finite iff `β < 2`, decided
/// exactly, with value `R^{2−β}/(2−β)`.
pub fn weight_integral(
    alpha: &Real,
    q: &Real,
    gamma: &Real,
    p: &Real,
    radius: f64,
) -> Result<WeightIntegral, NormError> {
    let gap: BigRational = p.exact() - BigRational::one() - gamma.exact();
    if !gap.is_positive() {
        return Err(NormError::PBelowGammaPlusOne);
    }
    let beta = alpha.exact() * (q.exact() + gamma.exact()) / gap;
    let two = BigRational::from_integer(2.into());
    let margin = &two - &beta;
    let beta_f = beta.to_f64().unwrap_or(f64::NAN);
    if margin <= BigRational::zero() {
        return Ok(WeightIntegral::Divergent { beta: beta_f });
    }
    let m = margin.to_f64().unwrap_or(f64::NAN);
    Ok(WeightIntegral::Finite { beta: beta_f, value: radius.powf(m) / m })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{RadialGrid, unit_ball_volume};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_field_norms() {
        let g = RadialGrid::new(3, 0.8, 120).unwrap();
        let u = vec![1.0; 120];
        let vol = g.ball_volume();
        for q in [1.0, 2.0, 3.5] {
            let n = lq_norm(&u, &g, q).unwrap();
            assert!((n - vol.powf(1.0 / q)).abs() < 1e-13);
        }
        assert_eq!(lq_norm(&u, &g, f64::INFINITY).unwrap(), 1.0);
        assert!(matches!(lq_norm(&u, &g, 0.5), Err(NormError::ExponentBelowOne(_))));
        assert!(lq_norm(&u[1..], &g, 2.0).is_err());
    }

    #[test]
    fn l2_norm_matches_independent_quadrature() {
        let g = RadialGrid::new(2, 1.0, 997).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u: Vec<f64> = (0..997).map(|_| rng.gen_range(-3.0..3.0)).collect();
        // Oracle: reversed order, pairwise summation of w u².
        let terms: Vec<f64> = u.iter().zip(g.weights()).rev().map(|(u, w)| w * u * u).collect();
        fn pairwise(x: &[f64]) -> f64 {
            if x.len() <= 2 {
                x.iter().sum()
            } else {
                let (a, b) = x.split_at(x.len() / 2);
                pairwise(a) + pairwise(b)
            }
        }
        let oracle = pairwise(&terms).sqrt();
        let got = lq_norm(&u, &g, 2.0).unwrap();
        assert!((got - oracle).abs() <= 1e-12 * oracle);
    }

    #[test]
    fn kahan_recovers_cancellation() {
        let s: KahanSum = [1.0, 1e100, 1.0, -1e100].into_iter().collect();
        assert_eq!(s.value(), 2.0);
    }

    #[test]
    fn unit_measure_constant_saturates_interpolation() {
        // |B_R| = 1 in two dimensions.
        let radius = (1.0 / unit_ball_volume(2)).sqrt();
        let g = RadialGrid::new(2, radius, 64).unwrap();
        let c = interpolation_check(&vec![1.0; 64], &g, 1.0, 2.0, f64::INFINITY).unwrap();
        assert!((c.lhs - 1.0).abs() < 1e-14 && (c.rhs - 1.0).abs() < 1e-14);
        assert!(c.holds);
        assert_eq!(c.theta, 0.5);
    }

    #[test]
    fn degenerate_triple_uses_theta_one() {
        let g = RadialGrid::new(2, 1.0, 16).unwrap();
        let u: Vec<f64> = (0..16).map(|i| i as f64).collect();
        let c = interpolation_check(&u, &g, 2.0, 2.0, 2.0).unwrap();
        assert_eq!(c.theta, 1.0);
        assert_eq!(c.lhs, c.rhs);
        assert!(interpolation_check(&u, &g, 3.0, 2.0, 4.0).is_err());
        assert!(interpolation_check(&u, &g, 0.5, 2.0, 4.0).is_err());
    }

    #[test]
    fn qstar_examples() {
        assert_eq!(qstar(2, 1.5, 2.0), QStar::Defined { value: 4.0 });
        assert!(matches!(qstar(2, 1.5, 3.0), QStar::Undefined { denominator, .. } if denominator == 0.0));
        assert_eq!(qstar(2, 1.5, 2.0).gradient_range(2), Some((2.0, 4.0)));
        assert!(qstar(2, 1.5, 1.0).value().is_none());
    }

    #[test]
    fn weight_integral_examples() {
        let (q, gamma, p) = (Real::integer(2), Real::ratio(3, 2), Real::integer(4));
        // Bound 6/7 exactly: divergent.
        let w = weight_integral(&Real::ratio(6, 7), &q, &gamma, &p, 1.0).unwrap();
        assert_eq!(w, WeightIntegral::Divergent { beta: 2.0 });
        // β = 0: ∫₀^R r dr.
        let w = weight_integral(&Real::integer(0), &q, &gamma, &p, 1.7).unwrap();
        assert!(matches!(w, WeightIntegral::Finite { value, .. } if (value - 1.7f64.powi(2) / 2.0).abs() < 1e-14));
        // β = 2 − ε' gives R^{ε'}/ε'.
        let eps = Real::ratio(1, 1000);
        let alpha = Real::from_exact((Real::ratio(6, 7).exact() * (Real::integer(2).exact() - eps.exact())) / Real::integer(2).exact());
        let w = weight_integral(&alpha, &q, &gamma, &p, 2.5).unwrap();
        let expected = 2.5f64.powf(1e-3) / 1e-3;
        assert!(matches!(w, WeightIntegral::Finite { value, .. } if (value - expected).abs() < 1e-9 * expected));
        assert_eq!(
            weight_integral(&alpha, &q, &gamma, &Real::ratio(5, 2), 1.0),
            Err(NormError::PBelowGammaPlusOne)
        );
    }

    proptest! {
        #[test]
        fn lq_monotone_on_normalised_measure(
            vals in proptest::collection::vec(0.0f64..10.0, 32),
            q1 in 1.0f64..6.0, dq in 0.0f64..6.0,
        ) {
            let g = RadialGrid::new(2, 0.7, 32).unwrap();
            let q2 = q1 + dq;
            let vol = g.ball_volume();
            let a = lq_norm(&vals, &g, q1).unwrap();
            let b = lq_norm(&vals, &g, q2).unwrap();
            prop_assert!(a <= b * vol.powf(1.0 / q1 - 1.0 / q2) * (1.0 + 1e-12) + 1e-300);
        }

        #[test]
        fn interpolation_holds_for_random_fields(
            vals in proptest::collection::vec(0.0f64..5.0, 24),
            s in 1.0f64..4.0, ds in 0.0f64..4.0, dt in 0.0f64..4.0, inf in any::<bool>(),
        ) {
            let g = RadialGrid::new(3, 1.0, 24).unwrap();
            let r = s + ds;
            let t = if inf { f64::INFINITY } else { r + dt };
            prop_assert!(interpolation_check(&vals, &g, s, r, t).unwrap().holds);
        }
    }
}
