//! The seeded verification suite behind `verify-lemmas`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::model::{validate_exponents, Constraint, ExponentSet, RadialGrid, Real, TensorGrid};
use crate::norms::{interpolation_check, weight_integral};
use crate::oracles::ode::{ode_comparison, OdeWitness};
use crate::oracles::probes::{semigroup_estimate_probe, structural_checks, ProbeKind, Verdict};
use crate::oracles::{OracleError, SemigroupProbe};

/// Tolerance of the structural semigroup identities.
pub const STRUCTURAL_TOL: f64 = 1e-12;
pub const DEFAULT_SAMPLES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteConfig {
    pub samples: usize,
    pub seed: u64,
    /// Scales every eigenvalue in the semigroup damping factors; a
    /// negative control for the suite.
    pub damping_scale: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { samples: DEFAULT_SAMPLES, seed: 0, damping_scale: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaCheck {
    pub id: String,
    pub samples: usize,
    /// Worst measured quantity: a ratio for the estimates, a defect for
    /// identities.
    pub constant: f64,
    pub verdict: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaReport {
    pub seed: u64,
    pub checks: Vec<LemmaCheck>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for LemmaReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.checks.iter().map(|c| c.id.chars().count()).max().unwrap_or(2).max(2);
        writeln!(f, "{:<width$}  {:>8}  {:>12}  verdict", "id", "samples", "constant")?;
        for c in &self.checks {
            let pad = width - c.id.chars().count();
            writeln!(f, "{}{}  {:>8}  {:>12.6e}  {}", c.id, " ".repeat(pad), c.samples, c.constant, c.verdict)?;
        }
        write!(f, "{}", if self.passed() { "all checks passed" } else { "some checks FAILED" })
    }
}

/// One semigroup estimate probe of the default suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeCase {
    pub kind: ProbeKind,
    pub p: f64,
    pub q: f64,
    pub rectangle: bool,
}

const fn case(kind: ProbeKind, p: f64, q: f64, rectangle: bool) -> ProbeCase {
    ProbeCase { kind, p, q, rectangle }
}

/// Probes run by the default suite.
pub const PROBE_CASES: [ProbeCase; 13] = [
    case(ProbeKind::Decay, f64::INFINITY, 1.0, false),
    case(ProbeKind::Decay, 2.0, 2.0, false),
    case(ProbeKind::Gradient, f64::INFINITY, 1.0, false),
    case(ProbeKind::Gradient, 2.0, 2.0, false),
    case(ProbeKind::GradientSobolev, 2.0, 2.0, false),
    case(ProbeKind::GradientSobolev, 4.0, 4.0, false),
    case(ProbeKind::Divergence, 4.0, 2.0, false),
    case(ProbeKind::Decay, 2.0, 2.0, true),
    case(ProbeKind::Gradient, f64::INFINITY, 1.0, true),
    case(ProbeKind::Gradient, 2.0, 2.0, true),
    case(ProbeKind::GradientSobolev, 2.0, 2.0, true),
    case(ProbeKind::Divergence, 4.0, 2.0, true),
    case(ProbeKind::Divergence, 2.0, 2.0, true),
];

/// Resolution of the interval probe.
pub const INTERVAL_MODES: usize = 512;
/// Per-side resolution of the square probe.
pub const SQUARE_MODES: usize = 64;

pub fn interval_probe(damping_scale: f64) -> Result<SemigroupProbe, OracleError> {
    let mut p = SemigroupProbe::interval(1.0, INTERVAL_MODES)?;
    p.damping_scale = damping_scale;
    Ok(p)
}

pub fn square_probe(damping_scale: f64) -> Result<SemigroupProbe, OracleError> {
    let mut p = SemigroupProbe::rectangle(1.0, 1.0, SQUARE_MODES)?;
    p.damping_scale = damping_scale;
    Ok(p)
}

fn exponent_label(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        format!("{x}")
    }
}

fn probe_id(c: &ProbeCase) -> String {
    let name = match c.kind {
        ProbeKind::Decay => "heat-decay",
        ProbeKind::Gradient => "heat-gradient",
        ProbeKind::GradientSobolev => "heat-gradient-sobolev",
        ProbeKind::Divergence => "heat-divergence",
    };
    let domain = if c.rectangle { "square" } else { "interval" };
    match c.kind {
        ProbeKind::GradientSobolev => format!("{name}/{domain}/p={}", exponent_label(c.p)),
        _ => format!("{name}/{domain}/p={},q={}", exponent_label(c.p), exponent_label(c.q)),
    }
}

fn ode_check(cfg: &SuiteConfig) -> Result<LemmaCheck, OracleError> {
    let mut worst = f64::NEG_INFINITY;
    let mut holds = true;
    for w in OdeWitness::random_suite(cfg.seed, cfg.samples) {
        let r = ode_comparison(&w, 50.0)?;
        worst = worst.max(r.max_y - r.bound);
        holds &= r.holds;
    }
    Ok(LemmaCheck {
        id: "ode-comparison".into(),
        samples: cfg.samples,
        constant: worst,
        verdict: if holds { "holds" } else { "violated" }.into(),
        passed: holds,
    })
}

fn interpolation_suite(cfg: &SuiteConfig) -> LemmaCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x1b7e);
    let radial = RadialGrid::new(3, 1.0, 120).expect("fixed grid");
    let disk = TensorGrid::disk(1.0, 40).expect("fixed grid");
    let mut worst = 0.0f64;
    let mut holds = true;
    for k in 0..cfg.samples {
        let len = if k % 2 == 0 { radial.weights().len() } else { disk.weights().len() };
        let heavy = rng.gen_range(0.5..4.0);
        let u: Vec<f64> = (0..len).map(|_| rng.gen::<f64>().powf(heavy) * rng.gen_range(-3.0..3.0)).collect();
        let mut e = [rng.gen_range(1.0..8.0), rng.gen_range(1.0..8.0), rng.gen_range(1.0..8.0)];
        if rng.gen_bool(0.2) {
            e[2] = f64::INFINITY;
        }
        e.sort_by(f64::total_cmp);
        let check = if k % 2 == 0 {
            interpolation_check(&u, &radial, e[0], e[1], e[2])
        } else {
            interpolation_check(&u, &disk, e[0], e[1], e[2])
        };
        match check {
            Ok(c) => {
                if c.rhs > 0.0 {
                    worst = worst.max(c.lhs / c.rhs);
                }
                holds &= c.holds;
            }
            Err(_) => holds = false,
        }
    }
    LemmaCheck {
        id: "interpolation".into(),
        samples: cfg.samples,
        constant: worst,
        verdict: if holds { "holds" } else { "violated" }.into(),
        passed: holds,
    }
}

/// Finiteness of the radial weight integral against the `α` verdict of
/// the exponent check, on a fixed grid of tuples with `p > γ+1`.
fn weight_consistency() -> LemmaCheck {
    let mut tuples = 0;
    let mut disagreements = 0;
    for n in [2u32, 3] {
        for g in 1..=8 {
            for p in 1..=8 {
                for q in 1..=6 {
                    for a in 1..=8 {
                        let e = ExponentSet::new(
                            n,
                            Real::ratio(4 + g, 4),
                            Real::ratio(3 + 2 * p, 2),
                            Real::ratio(q + 1, 1),
                            Real::ratio(a, 8),
                        );
                        let Ok(report) = validate_exponents(&e) else { continue };
                        let Ok(w) = weight_integral(&e.alpha, &e.q, &e.gamma, &e.p, 1.0) else { continue };
                        tuples += 1;
                        if w.is_finite() == report.violates(Constraint::AlphaBelowBound) {
                            disagreements += 1;
                        }
                    }
                }
            }
        }
    }
    LemmaCheck {
        id: "weight-integral-consistency".into(),
        samples: tuples,
        constant: disagreements as f64,
        verdict: if disagreements == 0 { "consistent" } else { "inconsistent" }.into(),
        passed: disagreements == 0,
    }
}

fn structural(name: &str, probe: &SemigroupProbe, cfg: &SuiteConfig) -> Result<LemmaCheck, OracleError> {
    let samples = cfg.samples.clamp(1, 50);
    let r = structural_checks(probe, samples, cfg.seed)?;
    let passed = r.passes(STRUCTURAL_TOL);
    Ok(LemmaCheck {
        id: format!("semigroup-identities/{name}"),
        samples,
        constant: r.semigroup.max(r.mass).max(r.contraction).max(r.eigenfunction),
        verdict: if passed { "exact" } else { "defective" }.into(),
        passed,
    })
}

/// Runs the ODE comparison, interpolation, weight-integral consistency,
/// semigroup identity and semigroup estimate checks.
pub fn verify_lemmas(cfg: &SuiteConfig) -> Result<LemmaReport, OracleError> {
    if cfg.samples == 0 {
        return Err(OracleError::Precondition("need at least one sample".into()));
    }
    let interval = interval_probe(cfg.damping_scale)?;
    let square = square_probe(cfg.damping_scale)?;
    let mut checks = vec![ode_check(cfg)?, interpolation_suite(cfg), weight_consistency()];
    checks.push(structural("interval", &interval, cfg)?);
    checks.push(structural("square", &square, cfg)?);
    for c in &PROBE_CASES {
        let probe = if c.rectangle { &square } else { &interval };
        let r = semigroup_estimate_probe(c.kind, c.p, c.q, cfg.samples, probe, cfg.seed)?;
        checks.push(LemmaCheck {
            id: probe_id(c),
            samples: cfg.samples,
            constant: r.constant_doubled,
            verdict: format!("{} (growth {:+.3})", r.verdict, r.growth),
            passed: r.verdict == Verdict::Bounded,
        });
    }
    Ok(LemmaReport { seed: cfg.seed, checks })
}
