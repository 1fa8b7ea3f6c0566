//! Measured constants for the smoothing estimates of the Neumann heat
//! semigroup, plus its structural checks.
//!
//! For each estimate the probe evaluates the ratio of the left side to the
//! right side with the constant set to 1, over random fields and times
//! log-spaced in `[10⁻⁴, 10]`, and reports the maximum. The verdict is
//! "bounded" when the maximum is finite and grows by at most 10% when the
//! sample count doubles (the doubled run extends the same random stream).

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::heat::SemigroupProbe;
use super::OracleError;

/// Allowed growth of the measured constant under doubling of the samples.
pub const STABILITY_GROWTH: f64 = 0.1;
/// Number of log-spaced probe times in `[10⁻⁴, 10]`.
pub const PROBE_TIMES: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ProbeKind {
    /// `‖e^{tΔ}w‖_p` against `‖w‖_q` for mean-zero `w`.
    #[serde(rename = "i")]
    Decay,
    /// `‖∇e^{tΔ}w‖_p` against `‖w‖_q`.
    #[serde(rename = "ii")]
    Gradient,
    /// `‖∇e^{tΔ}w‖_p` against `‖w‖_{W^{1,p}}`.
    #[serde(rename = "iii")]
    GradientSobolev,
    /// `‖e^{tΔ}∇·w‖_p` against `‖w‖_q`.
    #[serde(rename = "iv")]
    Divergence,
}

impl ProbeKind {
    pub const ALL: [ProbeKind; 4] =
        [ProbeKind::Decay, ProbeKind::Gradient, ProbeKind::GradientSobolev, ProbeKind::Divergence];

    pub fn label(self) -> &'static str {
        match self {
            ProbeKind::Decay => "i",
            ProbeKind::Gradient => "ii",
            ProbeKind::GradientSobolev => "iii",
            ProbeKind::Divergence => "iv",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.label() == s)
    }

    fn check_exponents(self, p: f64, q: f64) -> Result<(), OracleError> {
        let ok = match self {
            ProbeKind::Decay | ProbeKind::Gradient => 1.0 <= q && q <= p,
            ProbeKind::GradientSobolev => p >= 2.0 && p.is_finite(),
            ProbeKind::Divergence => 1.0 < q && q <= p && p.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(OracleError::Precondition(format!("exponents (p, q) = ({p}, {q}) outside the range of estimate {}", self.label())))
        }
    }
}

impl fmt::Display for ProbeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProbeField {
    Scalar(Vec<f64>),
    /// Components, each expanded in a sine series along its own axis.
    Vector(Vec<Vec<f64>>),
}

fn recip(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        1.0 / x
    }
}

/// `max(|mean|)` relative to `mean(|w|)` accepted as mean-zero.
pub const MEAN_ZERO_TOL: f64 = 1e-12;

/// Ratio of the two sides of estimate `kind` with constant 1, at time `t`.
pub fn probe_ratio(
    kind: ProbeKind,
    p: f64,
    q: f64,
    field: &ProbeField,
    t: f64,
    probe: &SemigroupProbe,
) -> Result<f64, OracleError> {
    kind.check_exponents(p, q)?;
    if !(t > 0.0) {
        return Err(OracleError::Precondition(format!("probe time {t} must be positive")));
    }
    let n = probe.dim() as f64;
    let a = 0.5 * n * (recip(q) - recip(p));
    let decay = (-probe.lambda1 * t).exp();
    let weight = |extra: f64| (1.0 + t.powf(-(extra + a))) * decay;
    match (kind, field) {
        (ProbeKind::Decay, ProbeField::Scalar(w)) => {
            let mean = probe.mean(w);
            let scale = w.iter().map(|x| x.abs()).sum::<f64>() / w.len() as f64;
            if mean.abs() > MEAN_ZERO_TOL * scale {
                return Err(OracleError::Precondition(format!("field has nonzero mean {mean:e}")));
            }
            let out = probe.heat_apply_mean_free(w, t)?;
            Ok(probe.norm(&out, p) / (weight(0.0) * probe.norm(w, q)))
        }
        (ProbeKind::Gradient, ProbeField::Scalar(w)) => {
            let g = probe.heat_gradient(w, t)?;
            Ok(probe.vector_norm(&g, p) / (weight(0.5) * probe.norm(w, q)))
        }
        (ProbeKind::GradientSobolev, ProbeField::Scalar(w)) => {
            let g = probe.heat_gradient(w, t)?;
            let g0 = probe.heat_gradient(w, 0.0)?;
            let sobolev = probe.norm(w, p) + probe.vector_norm(&g0, p);
            Ok(probe.vector_norm(&g, p) / (decay * sobolev))
        }
        (ProbeKind::Divergence, ProbeField::Vector(w)) => {
            let out = probe.heat_divergence(w, t)?;
            Ok(probe.norm(&out, p) / (weight(0.5) * probe.vector_norm(w, q)))
        }
        _ => Err(OracleError::Precondition(format!("wrong field type for estimate {}", kind.label()))),
    }
}

pub fn probe_times() -> Vec<f64> {
    let (lo, hi) = (1e-4f64.ln(), 10f64.ln());
    (0..PROBE_TIMES)
        .map(|i| (lo + (hi - lo) * i as f64 / (PROBE_TIMES - 1) as f64).exp())
        .collect()
}

/// Sum of one to three Gaussian bumps of random sign, width and position.
///
/// One time in four the field is instead a unit bump of the narrowest
/// resolved width at the midpoint or, without a margin, one or two such bumps
/// centred on the boundary. Otherwise, without a margin, each centre
/// coordinate sits on the boundary with probability 1/2.
fn random_bumps(probe: &SemigroupProbe, rng: &mut ChaCha8Rng, margin: f64) -> Vec<f64> {
    let (lx, ly) = probe.sides();
    let len = if probe.dim() == 2 { lx.min(ly) } else { lx };
    let sigma_min = 4.0 * len / probe.modes as f64;
    let (smin, smax) = (sigma_min.ln(), (0.3 * len).ln());
    let concentrated = rng.gen_bool(0.25);
    let count = match (concentrated, margin == 0.0) {
        (true, true) => rng.gen_range(1..=2),
        (true, false) => 1,
        _ => rng.gen_range(1..=3),
    };
    let smax = if concentrated { smin } else { smax };
    let coord = |rng: &mut ChaCha8Rng, l: f64| {
        if concentrated && margin > 0.0 {
            0.5 * l
        } else if margin == 0.0 && (concentrated || rng.gen_bool(0.5)) {
            if rng.gen_bool(0.5) {
                0.0
            } else {
                l
            }
        } else {
            l * rng.gen_range(margin..=1.0 - margin)
        }
    };
    let bumps: Vec<(f64, f64, f64, f64)> = (0..count)
        .map(|_| {
            let size = if concentrated { 1.0 } else { rng.gen_range(0.2..=1.0) };
            let amp = size * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let sigma = rng.gen_range(smin..=smax).exp();
            let cx = coord(rng, lx);
            let cy = coord(rng, ly);
            (amp, sigma, cx, cy)
        })
        .collect();
    probe
        .points()
        .iter()
        .map(|&[x, y]| {
            bumps
                .iter()
                .map(|&(a, s, cx, cy)| {
                    let dy = if probe.dim() == 2 { y - cy } else { 0.0 };
                    a * (-((x - cx).powi(2) + dy * dy) / (s * s)).exp()
                })
                .sum()
        })
        .collect()
}

/// `cos(jπx/Lx) cos(kπy/Ly)` for small random `j, k`, not both zero.
fn random_eigenfunction(probe: &SemigroupProbe, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let (lx, ly) = probe.sides();
    let (j, k) = loop {
        let j = rng.gen_range(0..=3);
        let k = if probe.dim() == 2 { rng.gen_range(0..=3) } else { 0 };
        if j + k > 0 {
            break (j as f64, k as f64);
        }
    };
    probe
        .points()
        .iter()
        .map(|&[x, y]| (j * PI * x / lx).cos() * (k * PI * y / ly).cos())
        .collect()
}

/// Bumps (three times in four) or a low Neumann eigenfunction.
fn random_scalar(probe: &SemigroupProbe, rng: &mut ChaCha8Rng) -> Vec<f64> {
    if rng.gen_bool(0.25) {
        random_eigenfunction(probe, rng)
    } else {
        random_bumps(probe, rng, 0.0)
    }
}

/// A random admissible field for estimate `kind`. Vector fields on the
/// rectangle are gradients of bump potentials half of the time; otherwise,
/// one time in four, a constant field with components in `{-1, 0, 1}`.
pub fn random_field(kind: ProbeKind, probe: &SemigroupProbe, rng: &mut ChaCha8Rng) -> ProbeField {
    match kind {
        ProbeKind::Decay => {
            let mut w = random_scalar(probe, rng);
            let mean = probe.mean(&w);
            w.iter_mut().for_each(|x| *x -= mean);
            ProbeField::Scalar(w)
        }
        ProbeKind::Gradient | ProbeKind::GradientSobolev => ProbeField::Scalar(random_scalar(probe, rng)),
        ProbeKind::Divergence if probe.dim() == 2 && rng.gen_bool(0.5) => {
            let potential = random_bumps(probe, rng, 0.2);
            ProbeField::Vector(probe.heat_gradient(&potential, 0.0).expect("field matches the probe"))
        }
        ProbeKind::Divergence if rng.gen_bool(0.25) => {
            let comps = loop {
                let c: Vec<f64> = (0..probe.dim()).map(|_| rng.gen_range(-1i32..=1) as f64).collect();
                if c.iter().any(|&x| x != 0.0) {
                    break c;
                }
            };
            ProbeField::Vector(comps.into_iter().map(|c| vec![c; probe.len()]).collect())
        }
        ProbeKind::Divergence => {
            ProbeField::Vector((0..probe.dim()).map(|_| random_bumps(probe, rng, 0.2)).collect())
        }
    }
}

/// Largest ratio of each sampled field over the probe times, in sample order.
pub fn field_maxima(
    kind: ProbeKind,
    p: f64,
    q: f64,
    samples: usize,
    probe: &SemigroupProbe,
    seed: u64,
) -> Result<Vec<f64>, OracleError> {
    kind.check_exponents(p, q)?;
    let times = probe_times();
    (0..samples)
        .into_par_iter()
        .map(|i| {
            let field = random_field(kind, probe, &mut sample_rng(seed, i));
            times.iter().try_fold(0.0f64, |m, &t| Ok(m.max(probe_ratio(kind, p, q, &field, t, probe)?)))
        })
        .collect()
}

/// Independent random stream for sample `i`.
fn sample_rng(seed: u64, i: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Bounded,
    Unstable,
    Unbounded,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Bounded => "bounded",
            Verdict::Unstable => "unstable",
            Verdict::Unbounded => "unbounded",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub kind: ProbeKind,
    pub p: f64,
    pub q: f64,
    pub samples: usize,
    /// Maximum ratio over the first `samples` fields.
    pub constant: f64,
    /// Maximum ratio over `2 · samples` fields.
    pub constant_doubled: f64,
    pub growth: f64,
    pub verdict: Verdict,
}

/// Measures the constant of estimate `kind` on `samples` random fields and
/// checks it against twice as many.
pub fn semigroup_estimate_probe(
    kind: ProbeKind,
    p: f64,
    q: f64,
    samples: usize,
    probe: &SemigroupProbe,
    seed: u64,
) -> Result<ProbeReport, OracleError> {
    if samples == 0 {
        return Err(OracleError::Precondition("need at least one sample".into()));
    }
    let maxima = field_maxima(kind, p, q, 2 * samples, probe, seed)?;
    let constant = maxima[..samples].iter().copied().fold(0.0, f64::max);
    let constant_doubled = maxima.iter().copied().fold(0.0, f64::max);
    let growth = constant_doubled / constant - 1.0;
    let verdict = if !constant_doubled.is_finite() || maxima.iter().any(|m| m.is_nan()) {
        Verdict::Unbounded
    } else if growth <= STABILITY_GROWTH {
        Verdict::Bounded
    } else {
        Verdict::Unstable
    };
    Ok(ProbeReport { kind, p, q, samples, constant, constant_doubled, growth, verdict })
}

/// Worst defects of the structural identities over random fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StructuralReport {
    pub samples: usize,
    /// `‖S(s)S(t)w − S(s+t)w‖_∞ / ‖w‖_∞`.
    pub semigroup: f64,
    /// `|mean S(t)w − mean w| / ‖w‖_∞`.
    pub mass: f64,
    /// `(‖S(t)w‖_∞ − ‖w‖_∞) / ‖w‖_∞ − tail`, where `tail` is the relative
    /// weight of the upper half of the cosine spectrum.
    pub contraction: f64,
    /// Max error against `e^{−λt}` times the eigenfunction.
    pub eigenfunction: f64,
}

impl StructuralReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.semigroup <= tol && self.mass <= tol && self.contraction <= tol && self.eigenfunction <= 1e-10
    }
}

/// Checks the semigroup law, mass conservation, `L^∞` contraction and
/// the closed-form decay of eigenfunctions.
pub fn structural_checks(probe: &SemigroupProbe, samples: usize, seed: u64) -> Result<StructuralReport, OracleError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let times = probe_times();
    let mut report = StructuralReport { samples, semigroup: 0.0, mass: 0.0, contraction: f64::NEG_INFINITY, eigenfunction: 0.0 };
    for _ in 0..samples {
        let ProbeField::Scalar(w) = random_field(ProbeKind::Gradient, probe, &mut rng) else { unreachable!() };
        let linf = probe.norm(&w, f64::INFINITY);
        let coeffs = probe.cosine_coefficients(&w)?;
        let half = coeffs.len() / 2;
        let total: f64 = coeffs.iter().map(|c| c.abs()).sum();
        let tail = if probe.dim() == 1 {
            coeffs[half..].iter().map(|c| c.abs()).sum::<f64>()
        } else {
            let n = probe.modes;
            coeffs
                .iter()
                .enumerate()
                .filter(|(i, _)| i % n >= n / 2 || i / n >= n / 2)
                .map(|(_, c)| c.abs())
                .sum::<f64>()
        } / total.max(f64::MIN_POSITIVE);
        let s = times[rng.gen_range(0..times.len())];
        let t = times[rng.gen_range(0..times.len())];
        let two_step = probe.heat_apply(&probe.heat_apply(&w, s)?, t)?;
        let one_step = probe.heat_apply(&w, s + t)?;
        let d = two_step.iter().zip(&one_step).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        report.semigroup = report.semigroup.max(d / linf);
        report.mass = report.mass.max((probe.mean(&one_step) - probe.mean(&w)).abs() / linf);
        let excess = (probe.norm(&one_step, f64::INFINITY) - linf) / linf - tail;
        report.contraction = report.contraction.max(excess);
    }
    report.contraction = report.contraction.max(0.0);
    report.eigenfunction = eigenfunction_defect(probe)?;
    Ok(report)
}

/// Compares `e^{tΔ}` on low eigenfunctions with `e^{−λt}φ` computed
/// directly from the formula.
pub fn eigenfunction_defect(probe: &SemigroupProbe) -> Result<f64, OracleError> {
    let pts = probe.points();
    let (lx, ly) = probe.sides();
    let modes: &[(usize, usize)] = if probe.dim() == 1 { &[(1, 0), (2, 0), (5, 0)] } else { &[(1, 0), (0, 1), (2, 3)] };
    let mut worst = 0.0f64;
    for &(mx, my) in modes {
        let kx = mx as f64 * PI / lx;
        let ky = my as f64 * PI / ly;
        let phi: Vec<f64> = pts.iter().map(|&[x, y]| (kx * x).cos() * (ky * y).cos()).collect();
        for t in [1e-3, 0.1, 1.0] {
            let out = probe.heat_apply(&phi, t)?;
            let decay = (-(kx * kx + ky * ky) * t).exp();
            let d = out.iter().zip(&phi).fold(0.0f64, |m, (o, f)| m.max((o - decay * f).abs()));
            worst = worst.max(d);
        }
    }
    Ok(worst)
}
