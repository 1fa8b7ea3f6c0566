use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize, Serializer};

use super::real::{Real, RealError};
use super::ModelError;

/// The exponents `(n, γ, p, q, α)` of an experiment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExponentSet {
    /// Spatial dimension.
    pub n: u32,
    /// Secretion exponent in `u^γ`.
    pub gamma: Real,
    /// Logistic decay exponent in `μ u^p`.
    pub p: Real,
    /// Integrability exponent of the monitored `L^q` norm.
    pub q: Real,
    /// Degeneracy exponent of `μ(s) ≥ μ₁ s^α`.
    pub alpha: Real,
}

impl ExponentSet {
    pub fn new(n: u32, gamma: Real, p: Real, q: Real, alpha: Real) -> Self {
        Self { n, gamma, p, q, alpha }
    }

    /// Builds the set from floats, naming the first non-finite field.
    pub fn from_f64(n: u32, gamma: f64, p: f64, q: f64, alpha: f64) -> Result<Self, ModelError> {
        let conv = |field: &'static str, x: f64| {
            Real::from_f64(x).map_err(|_: RealError| ModelError::NonFinite { field })
        };
        Ok(Self {
            n,
            gamma: conv("gamma", gamma)?,
            p: conv("p", p)?,
            q: conv("q", q)?,
            alpha: conv("alpha", alpha)?,
        })
    }

    /// `2(p − 1 − γ)/(q + γ)`, exactly.
    pub fn alpha_bound(&self) -> Real {
        alpha_bound_exact(self.gamma.exact(), self.p.exact(), self.q.exact())
    }
}

fn alpha_bound_exact(gamma: &BigRational, p: &BigRational, q: &BigRational) -> Real {
    let two = BigRational::from_integer(2.into());
    let denom = q + gamma;
    if denom.is_zero() {
        return Real::from_exact(BigRational::zero());
    }
    Real::from_exact(two * (p - BigRational::one() - gamma) / denom)
}

/// A condition of the admissible region, or of the coefficient bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Constraint {
    DimensionAtLeastTwo,
    GammaAboveOne,
    PAboveGammaPlusOne,
    QAboveHalfNGamma,
    AlphaBelowBound,
    MuLowerBound,
    KappaNonnegative,
    MuNonnegative,
}

impl Constraint {
    pub fn name(self) -> &'static str {
        match self {
            Constraint::DimensionAtLeastTwo => "n≥2",
            Constraint::GammaAboveOne => "γ>1",
            Constraint::PAboveGammaPlusOne => "p>γ+1",
            Constraint::QAboveHalfNGamma => "q>nγ/2",
            Constraint::AlphaBelowBound => "α strictly below bound",
            Constraint::MuLowerBound => "μ(s)≥μ₁sᵅ",
            Constraint::KappaNonnegative => "κ≥0",
            Constraint::MuNonnegative => "μ≥0",
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for Constraint {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

/// A node at which a coefficient check failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeViolation {
    pub index: usize,
    pub radius: f64,
    pub constraint: Constraint,
    pub value: f64,
    pub required: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub accepted: bool,
    pub violations: Vec<Constraint>,
    pub alpha_bound: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub offending_nodes: Vec<NodeViolation>,
}

impl AdmissibilityReport {
    pub fn violates(&self, c: Constraint) -> bool {
        self.violations.contains(&c)
    }

    pub(crate) fn absorb_nodes(&mut self, nodes: Vec<NodeViolation>) {
        for node in &nodes {
            if !self.violations.contains(&node.constraint) {
                self.violations.push(node.constraint);
            }
        }
        self.offending_nodes.extend(nodes);
        self.accepted = self.violations.is_empty();
    }
}

/// Checks the admissible exponent region with exact
/// comparisons; every inequality is strict.
pub fn validate_exponents(e: &ExponentSet) -> Result<AdmissibilityReport, ModelError> {
    if e.n == 0 {
        return Err(ModelError::NonPositive { field: "n" });
    }
    for (field, value) in [("gamma", &e.gamma), ("p", &e.p), ("q", &e.q), ("alpha", &e.alpha)] {
        if !value.is_positive() {
            return Err(ModelError::NonPositive { field });
        }
    }

    let (gamma, p, q, alpha) = (e.gamma.exact(), e.p.exact(), e.q.exact(), e.alpha.exact());
    let one = BigRational::one();
    let n = BigRational::from_integer(e.n.into());
    let two = BigRational::from_integer(2.into());
    let bound = alpha_bound_exact(gamma, p, q);

    let mut violations = Vec::new();
    if e.n < 2 {
        violations.push(Constraint::DimensionAtLeastTwo);
    }
    if gamma <= &one {
        violations.push(Constraint::GammaAboveOne);
    }
    if p <= &(gamma + &one) {
        violations.push(Constraint::PAboveGammaPlusOne);
    }
    if q <= &(n * gamma / two) {
        violations.push(Constraint::QAboveHalfNGamma);
    }
    if alpha >= bound.exact() {
        violations.push(Constraint::AlphaBelowBound);
    }

    Ok(AdmissibilityReport {
        accepted: violations.is_empty(),
        violations,
        alpha_bound: bound.to_f64(),
        offending_nodes: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(n: u32, gamma: Real, p: Real, q: Real, alpha: Real) -> ExponentSet {
        ExponentSet::new(n, gamma, p, q, alpha)
    }

    #[test]
    fn demo_exponents_accepted_with_bound_six_sevenths() {
        let e = set(2, Real::ratio(3, 2), 4.into(), 2.into(), Real::ratio(1, 2));
        let report = validate_exponents(&e).unwrap();
        assert!(report.accepted);
        assert!(report.violations.is_empty());
        assert_eq!(e.alpha_bound(), Real::ratio(6, 7));
        assert_eq!(report.alpha_bound, 6.0 / 7.0);
    }

    #[test]
    fn gamma_one_rejected() {
        let e = set(2, 1.into(), 4.into(), 2.into(), Real::ratio(1, 2));
        let report = validate_exponents(&e).unwrap();
        assert!(!report.accepted);
        assert!(report.violates(Constraint::GammaAboveOne));
        assert_eq!(Constraint::GammaAboveOne.name(), "γ>1");
    }

    #[test]
    fn alpha_at_bound_rejected() {
        let e = set(2, Real::ratio(3, 2), 4.into(), 2.into(), Real::ratio(6, 7));
        let report = validate_exponents(&e).unwrap();
        assert!(!report.accepted);
        assert_eq!(report.violations, vec![Constraint::AlphaBelowBound]);
        assert_eq!(Constraint::AlphaBelowBound.name(), "α strictly below bound");
    }

    #[test]
    fn float_inputs_compared_exactly() {
        // 6.0/7.0 rounds below 6/7, so as a float it is strictly admissible.
        let e = ExponentSet::from_f64(2, 1.5, 4.0, 2.0, 6.0 / 7.0).unwrap();
        assert!(validate_exponents(&e).unwrap().accepted);
        // The float closest above 6/7 is not.
        let above = f64::from_bits((6.0f64 / 7.0).to_bits() + 1);
        let e = ExponentSet::from_f64(2, 1.5, 4.0, 2.0, above).unwrap();
        assert!(!validate_exponents(&e).unwrap().accepted);
    }

    #[test]
    fn boundary_values_rejected() {
        // p = γ + 1 exactly, q = nγ/2 exactly
        let e = set(2, Real::ratio(3, 2), Real::ratio(5, 2), Real::ratio(3, 2), Real::ratio(1, 10));
        let r = validate_exponents(&e).unwrap();
        assert!(r.violates(Constraint::PAboveGammaPlusOne));
        assert!(r.violates(Constraint::QAboveHalfNGamma));
        let e = set(1, Real::ratio(3, 2), 4.into(), 2.into(), Real::ratio(1, 2));
        assert!(validate_exponents(&e).unwrap().violates(Constraint::DimensionAtLeastTwo));
    }

    #[test]
    fn nonpositive_and_nonfinite_inputs_are_errors() {
        let e = set(2, Real::ratio(3, 2), 4.into(), 2.into(), 0.into());
        assert_eq!(validate_exponents(&e), Err(ModelError::NonPositive { field: "alpha" }));
        let e = set(0, Real::ratio(3, 2), 4.into(), 2.into(), 1.into());
        assert_eq!(validate_exponents(&e), Err(ModelError::NonPositive { field: "n" }));
        let e = set(2, Real::ratio(3, 2), (-4).into(), 2.into(), 1.into());
        assert_eq!(validate_exponents(&e), Err(ModelError::NonPositive { field: "p" }));
        assert_eq!(
            ExponentSet::from_f64(2, 1.5, f64::NAN, 2.0, 0.5),
            Err(ModelError::NonFinite { field: "p" })
        );
    }

    proptest! {
        #[test]
        fn admissibility_monotone_in_alpha(
            gamma in 1.0f64..4.0,
            dp in 0.0f64..4.0,
            q in 0.5f64..10.0,
            a1 in 1e-3f64..2.0,
            a2 in 1e-3f64..2.0,
        ) {
            let (lo, hi) = if a1 < a2 { (a1, a2) } else { (a2, a1) };
            let p = gamma + 1.0 + dp;
            let hi_set = ExponentSet::from_f64(2, gamma, p, q, hi).unwrap();
            let lo_set = ExponentSet::from_f64(2, gamma, p, q, lo).unwrap();
            if validate_exponents(&hi_set).unwrap().accepted {
                prop_assert!(validate_exponents(&lo_set).unwrap().accepted);
            }
        }
    }
}
