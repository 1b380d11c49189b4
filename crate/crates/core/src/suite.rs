//! Smoke and full runs of every acceptance check, each producing one or
//! more [`ExperimentReport`]s grouped by criterion.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::str::FromStr;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::expansion::{Expansion, ExpansionSampler};
use crate::fractional::{caputo_numeric_poisson, caputo_poisson, l2_isometry_check, polarized_check, SquareFunction};
use crate::grid::uniform_nodes;
use crate::jacobi::{psi_weight, PhiEvaluator};
use crate::kernels::{audit_regimes, cz_audit, AuditGrid, AuditKind};
use crate::lemma36::{default_cases, default_q_grid, lemma36_check};
use crate::params::ParameterPair;
use crate::quadrature::{Measure, QuadratureRule};
use crate::report::{Check, ExperimentReport, Stats, SuiteSettings, Table};
use crate::schrodinger::{schrodinger_evolution, MixedNormConfig, MixedNormGrid};
use crate::spaces::{
    embedding_experiment, equivalence_experiment, gfunction_norm_experiment, structural_experiment,
    weighted_gfunction_experiment, PotentialSpace, StructuralCase,
};
use crate::spectral::{derivative_d, laplacian_power};
use crate::timequad::TimeQuadrature;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteKind {
    Smoke,
    Full,
}

impl FromStr for SuiteKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smoke" => Ok(SuiteKind::Smoke),
            "full" => Ok(SuiteKind::Full),
            other => Err(Error::InvalidArgument(format!(
                "unknown suite '{other}', expected 'smoke' or 'full'"
            ))),
        }
    }
}

impl std::fmt::Display for SuiteKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SuiteKind::Smoke => "smoke",
            SuiteKind::Full => "full",
        })
    }
}

/// Sizes of every criterion in a suite run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub kind: SuiteKind,
    pub seed: u64,
    /// Samples per ratio suite.
    pub ratio_samples: usize,
    pub ratio_resolution: usize,
    /// Random expansions per pair for the exact identities.
    pub identity_samples: usize,
    pub audit_grid: AuditGrid,
    /// `(alpha, beta, gamma, kind)` kernel audits.
    pub audits: Vec<(f64, f64, f64, AuditKind)>,
    pub budget_ms: u64,
    #[serde(skip)]
    pub exec: Execution,
}

impl SuiteConfig {
    pub fn smoke() -> Self {
        Self {
            kind: SuiteKind::Smoke,
            seed: 20240611,
            ratio_samples: 40,
            ratio_resolution: 64,
            identity_samples: 2,
            audit_grid: AuditGrid {
                points: 8,
                ..Default::default()
            },
            audits: vec![
                (0.0, 0.0, 0.5, AuditKind::Growth),
                (0.0, 0.0, 1.5, AuditKind::Gradient),
                (-0.75, -0.6, 0.5, AuditKind::Growth),
            ],
            budget_ms: 60_000,
            exec: Execution::Parallel,
        }
    }

    pub fn full() -> Self {
        let mut audits = Vec::new();
        for p in audit_regimes() {
            for gamma in [0.5, 1.5] {
                for kind in [AuditKind::Growth, AuditKind::Gradient] {
                    audits.push((p.alpha(), p.beta(), gamma, kind));
                }
            }
        }
        Self {
            kind: SuiteKind::Full,
            seed: 20240611,
            ratio_samples: 300,
            ratio_resolution: 128,
            identity_samples: 5,
            audit_grid: AuditGrid::default(),
            audits,
            budget_ms: 30 * 60_000,
            exec: Execution::Parallel,
        }
    }

    pub fn for_kind(kind: SuiteKind) -> Self {
        match kind {
            SuiteKind::Smoke => Self::smoke(),
            SuiteKind::Full => Self::full(),
        }
    }

    fn settings(&self) -> SuiteSettings {
        SuiteSettings {
            samples: self.ratio_samples,
            seed: self.seed,
            sampler: ExpansionSampler::default(),
            resolution: self.ratio_resolution,
            exec: self.exec,
        }
    }
}

/// Reports of one criterion with its wall-clock budget.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub pass: bool,
    pub runtime_ms: u64,
    pub budget_ms: Option<u64>,
    pub reports: Vec<ExperimentReport>,
}

impl CriterionResult {
    fn new(id: u32, name: &str, budget_ms: Option<u64>, start: Instant, reports: Vec<ExperimentReport>) -> Self {
        let runtime_ms = start.elapsed().as_millis() as u64;
        let within = budget_ms.is_none_or(|b| runtime_ms <= b);
        let pass = within && !reports.is_empty() && reports.iter().all(|r| r.pass == Some(true));
        Self {
            id,
            name: name.to_string(),
            pass,
            runtime_ms,
            budget_ms,
            reports,
        }
    }

    /// One line for terminals: id, name, verdict, runtime.
    pub fn summary_line(&self) -> String {
        let budget = self.budget_ms.map(|b| format!(" (budget {b} ms)")).unwrap_or_default();
        format!(
            "criterion {:>2} {:<24} {} in {} ms{budget}",
            self.id,
            self.name,
            if self.pass { "PASS" } else { "FAIL" },
            self.runtime_ms
        )
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: SuiteKind,
    pub config: SuiteConfig,
    pub pass: bool,
    pub runtime_ms: u64,
    pub criteria: Vec<CriterionResult>,
}

impl SuiteReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("suite report serializes")
    }

    /// Copy with every runtime field zeroed, for byte-stable persistence.
    pub fn without_runtime(&self) -> Self {
        let mut c = self.clone();
        c.runtime_ms = 0;
        for k in &mut c.criteria {
            k.runtime_ms = 0;
            k.reports.iter_mut().for_each(|r| r.runtime_ms = 0);
        }
        c
    }

    /// `criterion,name,pass,runtime_ms,budget_ms` CSV.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("criterion,name,pass,runtime_ms,budget_ms\n");
        for c in &self.criteria {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                c.id,
                c.name,
                c.pass,
                c.runtime_ms,
                c.budget_ms.map(|b| b.to_string()).unwrap_or_default()
            ));
        }
        out
    }
}

fn pair(a: f64, b: f64) -> ParameterPair {
    ParameterPair::new(a, b).expect("valid pair")
}

fn finish(mut report: ExperimentReport) -> ExperimentReport {
    report.finish_from_checks();
    report
}

/// Largest `|<phi_i, phi_j> - delta_ij|` for `i, j < len` by Gauss-Jacobi
/// quadrature exact to degree `2 len + 15`.
pub fn gram_deviation(params: &ParameterPair, len: usize) -> Result<f64> {
    let rule = QuadratureRule::gauss_jacobi(len + 8, params, Measure::Lebesgue)?;
    let m = PhiEvaluator::new(params, len).phi_matrix(rule.nodes(), len);
    let mut worst: f64 = 0.0;
    for i in 0..len {
        for j in 0..=i {
            let g: f64 = m
                .chunks(len)
                .zip(rule.weights())
                .map(|(row, w)| w * row[i] * row[j])
                .sum();
            let d = if i == j { g - 1.0 } else { g };
            worst = worst.max(d.abs());
        }
    }
    Ok(worst)
}

pub fn orthonormality_pairs() -> Vec<ParameterPair> {
    vec![pair(-0.5, -0.5), pair(0.0, 0.0), pair(-0.75, 1.0 / 3.0), pair(2.0, -0.9)]
}

/// Criterion 1.
pub fn orthonormality_report(len: usize) -> Result<ExperimentReport> {
    let mut r = ExperimentReport::new("orthonormality");
    let mut t = Table::new("gram", &["alpha", "beta", "max_deviation"]);
    let mut worst: f64 = 0.0;
    for p in orthonormality_pairs() {
        let d = gram_deviation(&p, len)?;
        t.push(vec![p.alpha(), p.beta(), d]);
        worst = worst.max(d);
    }
    r.setting("max_index", len - 1);
    r.checks.push(Check::at_most("max_gram_deviation", worst, 1e-10));
    r.tables.push(t);
    Ok(finish(r))
}

/// Criterion 2: `phi_n` against `sqrt(2/pi) cos(n theta)` on `points` midpoints.
pub fn cosine_report(max_n: usize, points: usize) -> Result<ExperimentReport> {
    let p = ParameterPair::chebyshev();
    let nodes = uniform_nodes(points);
    let m = PhiEvaluator::new(&p, max_n + 1).phi_matrix(&nodes, max_n + 1);
    let c = (2.0 / PI).sqrt();
    let mut worst: f64 = 0.0;
    for (row, &th) in m.chunks(max_n + 1).zip(&nodes) {
        for (n, &v) in row.iter().enumerate().skip(1) {
            worst = worst.max((v - c * (n as f64 * th).cos()).abs());
        }
    }
    let mut r = ExperimentReport::new("cosine_degeneration");
    r.setting("max_n", max_n).setting("points", points);
    r.checks.push(Check::at_most("max_abs_err", worst, 1e-10));
    Ok(finish(r))
}

/// `Psi (f / Psi)'` by a fourth-order central difference with step `h`.
pub fn derivative_fd(e: &Expansion, theta: f64, h: f64) -> Result<Complex64> {
    let p = e.params();
    let g = |t: f64| -> Result<Complex64> { Ok(e.synthesize(t)? / psi_weight(t, p)?) };
    let d = (-g(theta + 2.0 * h)? + g(theta + h)? * 8.0 - g(theta - h)? * 8.0 + g(theta - 2.0 * h)?) / (12.0 * h);
    Ok(d * psi_weight(theta, p)?)
}

/// Criterion 3: coefficient identity and pointwise agreement of `D`.
pub fn derivative_report(seed: u64, samples: usize) -> Result<ExperimentReport> {
    let pairs = [pair(0.0, 0.0), pair(-0.5, -0.5), pair(-0.3, 0.8), pair(1.5, -0.6)];
    let sampler = ExpansionSampler { modes: 16, decay: 1.5 };
    let nodes: Vec<f64> = (0..48).map(|j| 0.15 + (PI - 0.3) * (j as f64 + 0.5) / 48.0).collect();
    let (mut coeff_err, mut point_err) = (0.0f64, 0.0f64);
    let mut t = Table::new("derivative", &["alpha", "beta", "sample", "coeff_rel_err", "pointwise_rel_err"]);
    for p in pairs {
        for i in 0..samples {
            let e = sampler.sample(&p, seed, i as u64);
            let d = derivative_d(&e)?;
            let scale = d.l2_norm().max(f64::MIN_POSITIVE);
            let mut ce: f64 = 0.0;
            for (n, a) in e.coeffs().iter().enumerate().skip(1) {
                let nf = n as f64;
                let w = -(nf * (nf + p.alpha() + p.beta() + 1.0)).sqrt();
                ce = ce.max((d.coeffs()[n - 1] - a * w).norm() / scale);
            }
            let vals = d.synthesize_on(&nodes);
            let sup = vals.iter().map(|v| v.norm()).fold(f64::MIN_POSITIVE, f64::max);
            let mut pe: f64 = 0.0;
            for (&th, v) in nodes.iter().zip(&vals) {
                pe = pe.max((derivative_fd(&e, th, 2e-4)? - v).norm() / sup);
            }
            t.push(vec![p.alpha(), p.beta(), i as f64, ce, pe]);
            coeff_err = coeff_err.max(ce);
            point_err = point_err.max(pe);
        }
    }
    let mut r = ExperimentReport::new("derivative_identity");
    r.seed = Some(seed);
    r.samples = samples;
    r.setting("fd_step", 2e-4).setting("theta_window", [0.15, PI - 0.15]);
    r.checks.push(Check::at_most("coefficient_rel_err", coeff_err, 1e-14));
    r.checks.push(Check::at_most("pointwise_rel_err", point_err, 1e-6));
    r.tables.push(t);
    Ok(finish(r))
}

/// Criterion 4: closed-form Caputo derivative against quadrature.
pub fn caputo_report(seed: u64, cases: usize) -> Result<ExperimentReport> {
    let pairs = [pair(0.0, 0.0), pair(-0.5, -0.5), pair(0.4, -0.7), pair(1.5, 0.5)];
    let sampler = ExpansionSampler { modes: 8, decay: 1.5 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Table::new("caputo", &["case", "alpha", "beta", "gamma", "t", "theta", "rel_err"]);
    let mut errs = Vec::with_capacity(cases);
    for i in 0..cases {
        let p = pairs[i % pairs.len()];
        let e = sampler.sample(&p, seed, i as u64);
        let gamma: f64 = rng.random_range(0.1..3.5);
        let time: f64 = rng.random_range(0.2..2.0);
        let theta: f64 = rng.random_range(0.2..PI - 0.2);
        let a = caputo_poisson(&e, gamma, time, theta)?;
        let b = caputo_numeric_poisson(&e, gamma, time, theta, false)?;
        let err = (a - b).norm() / a.norm().max(f64::MIN_POSITIVE);
        t.push(vec![i as f64, p.alpha(), p.beta(), gamma, time, theta, err]);
        errs.push(err);
    }
    let mut r = ExperimentReport::new("caputo_oracle");
    r.seed = Some(seed);
    r.samples = cases;
    r.checks.push(Check::at_most("max_rel_err", errs.iter().copied().fold(0.0, f64::max), 1e-6));
    r.stats = Stats::from_values(&errs);
    r.tables.push(t);
    Ok(finish(r))
}

/// Criterion 5: the `L^2` isometry and its polarized form.
pub fn isometry_report(seed: u64, samples: usize) -> Result<ExperimentReport> {
    let pairs = [pair(-0.5, -0.5), pair(-0.3, -0.7), pair(0.0, 0.0), pair(1.5, -0.4)];
    let sampler = ExpansionSampler::default();
    let mut t = Table::new("isometry", &["alpha", "beta", "gamma", "sample", "rel_err", "polarized_err"]);
    let (mut iso, mut pol) = (0.0f64, 0.0f64);
    for p in pairs {
        for gamma in [0.25, 1.0, 3.5] {
            for i in 0..samples {
                let f = sampler.sample(&p, seed, 2 * i as u64);
                let g = sampler.sample(&p, seed, 2 * i as u64 + 1);
                let a = l2_isometry_check(&f, gamma)?.rel_err;
                let b = polarized_check(&f, &g, gamma)?.2;
                t.push(vec![p.alpha(), p.beta(), gamma, i as f64, a, b]);
                iso = iso.max(a);
                pol = pol.max(b);
            }
        }
    }
    let mut r = ExperimentReport::new("l2_isometry");
    r.seed = Some(seed);
    r.samples = samples;
    r.checks.push(Check::at_most("isometry_rel_err", iso, 1e-6));
    r.checks.push(Check::at_most("polarized_rel_err", pol, 1e-6));
    r.tables.push(t);
    Ok(finish(r))
}

/// Time rule for `kind` over `e` with its rate window widened by `widen`
/// on both sides, so that two evaluations use different nodes.
fn widened_rule(kind: SquareFunction, e: &Expansion, widen: f64) -> Result<Option<TimeQuadrature>> {
    let p = e.params();
    let rates: Vec<f64> = (0..e.len())
        .filter(|&n| kind.amplitude(p, n) != 0.0)
        .map(|n| kind.rate(p, n))
        .collect();
    if rates.is_empty() {
        return Ok(None);
    }
    let lo = rates.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = rates.iter().copied().fold(0.0, f64::max);
    TimeQuadrature::new(kind.rho(), lo / widen, hi * widen).map(Some)
}

/// Largest pointwise relative gap between `g^{gamma,k}(f)` and
/// `g^{k-gamma}(L^{gamma/2} f)` on `thetas`.
pub fn composition_defect(e: &Expansion, gamma: f64, k: u32, thetas: &[f64]) -> Result<f64> {
    let lhs_kind = SquareFunction::Higher { gamma, k };
    let rhs_kind = SquareFunction::Fractional { gamma: k as f64 - gamma };
    let lifted = laplacian_power(e, gamma / 2.0)?;
    let (Some(tl), Some(tr)) = (widened_rule(lhs_kind, e, 1.0)?, widened_rule(rhs_kind, &lifted, 2.0)?) else {
        return Ok(0.0);
    };
    let lhs = lhs_kind.evaluate(e, thetas, &tl, Execution::Sequential)?;
    let rhs = rhs_kind.evaluate(&lifted, thetas, &tr, Execution::Sequential)?;
    Ok(lhs
        .iter()
        .zip(&rhs)
        .map(|(a, b)| (a - b).abs() / a.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max))
}

/// Criterion 6.
pub fn composition_report(seed: u64, cases: usize) -> Result<ExperimentReport> {
    let pairs = [pair(0.0, 0.0), pair(-0.5, -0.5), pair(0.7, -0.2), pair(-0.6, 0.3), pair(2.0, 1.0)];
    let orders = [(0.5, 1), (1.3, 2), (0.75, 3), (2.2, 3), (1.0, 2)];
    let sampler = ExpansionSampler { modes: 24, decay: 1.5 };
    let thetas = uniform_nodes(16);
    let mut t = Table::new("composition", &["case", "alpha", "beta", "gamma", "k", "max_rel_err"]);
    let mut worst: f64 = 0.0;
    for i in 0..cases {
        let p = pairs[i % pairs.len()];
        let (gamma, k) = orders[(i / pairs.len() + i) % orders.len()];
        let e = sampler.sample(&p, seed, i as u64);
        let d = composition_defect(&e, gamma, k, &thetas)?;
        t.push(vec![i as f64, p.alpha(), p.beta(), gamma, k as f64, d]);
        worst = worst.max(d);
    }
    let mut r = ExperimentReport::new("composition_identity");
    r.seed = Some(seed);
    r.samples = cases;
    r.checks.push(Check::at_most("max_rel_err", worst, 1e-8));
    r.tables.push(t);
    Ok(finish(r))
}

/// Criterion 7: `p = 2` equivalence runs.
pub fn p2_equivalence_reports(settings: &SuiteSettings) -> Result<Vec<ExperimentReport>> {
    [(pair(0.0, 0.0), 0.7, 2), (pair(-0.5, -0.5), 0.5, 1), (pair(1.0, -0.5), 1.25, 2)]
        .iter()
        .map(|&(p, gamma, k)| equivalence_experiment(&p, 2.0, gamma, k, settings))
        .collect()
}

/// Criterion 8: ratio suites for derivatives, Riesz transforms,
/// embeddings, equivalences and (weighted) square-function norms.
pub fn ratio_suite_reports(settings: &SuiteSettings) -> Result<Vec<ExperimentReport>> {
    let p00 = pair(0.0, 0.0);
    let pa = pair(-0.3, 0.4);
    let cheb = ParameterPair::chebyshev();
    Ok(vec![
        structural_experiment(&PotentialSpace::standard(p00, 3.0, 1.5)?, StructuralCase::Derivative { k: 1 }, settings)?,
        structural_experiment(&PotentialSpace::standard(pa, 1.5, 2.5)?, StructuralCase::Derivative { k: 2 }, settings)?,
        structural_experiment(&PotentialSpace::standard(pa, 1.5, 0.5)?, StructuralCase::RieszTransform { k: 1 }, settings)?,
        structural_experiment(&PotentialSpace::standard(cheb, 3.0, 0.5)?, StructuralCase::RieszTransform { k: 1 }, settings)?,
        embedding_experiment(&PotentialSpace::standard(p00, 2.0, 0.25)?, 4.0, settings)?,
        embedding_experiment(&PotentialSpace::standard(pair(0.5, 0.5), 2.0, 1.0)?, f64::INFINITY, settings)?,
        embedding_experiment(&PotentialSpace::standard(pa, 1.5, 0.5)?, 3.0, settings)?,
        equivalence_experiment(&p00, 3.0, 0.7, 2, settings)?,
        equivalence_experiment(&cheb, 1.5, 0.5, 1, settings)?,
        gfunction_norm_experiment(&pair(0.2, -0.3), 3.0, 0.5, settings)?,
        gfunction_norm_experiment(&cheb, 4.0, 1.5, settings)?,
        weighted_gfunction_experiment(&p00, 3.0, 0.5, settings)?,
        weighted_gfunction_experiment(&pa, 1.5, 1.0, settings)?,
    ])
}

/// Criterion 9: inclusion runs, each checking the isometric lift.
pub fn isomorphism_reports(settings: &SuiteSettings) -> Result<Vec<ExperimentReport>> {
    [
        (pair(-0.3, 0.4), 1.5, 1.0, 0.5),
        (pair(1.0, 1.0), 3.0, 1.0, 0.5),
        (ParameterPair::chebyshev(), 2.0, 1.0, 0.25),
    ]
    .iter()
    .map(|&(p, q, s, r)| structural_experiment(&PotentialSpace::standard(p, q, s)?, StructuralCase::Inclusion { r }, settings))
    .collect()
}

/// Criterion 10: unitarity, the group law at dyadic times, and the exact
/// mixed `L^p_theta L^2_t` identity for integer `alpha + beta`.
pub fn schrodinger_report(seed: u64, samples: usize) -> Result<ExperimentReport> {
    let modes = 16;
    let sampler = ExpansionSampler { modes, decay: 1.0 };
    let times = [0.5, 1.75, 2.0 * PI, 37.25, -3.125];
    let pairs_law = [(0.5, 0.25), (1.75, -0.625), (3.125, 2.5)];
    let (mut unit, mut law) = (0.0f64, 0.0f64);
    for p in [pair(0.3, -0.6), pair(0.0, 0.0), pair(-0.5, -0.5)] {
        for i in 0..samples {
            let e = sampler.sample(&p, seed, i as u64);
            let norm = e.l2_norm();
            for &t in &times {
                unit = unit.max((schrodinger_evolution(&e, t)?.l2_norm() - norm).abs() / norm);
            }
            for &(t, s) in &pairs_law {
                let a = schrodinger_evolution(&schrodinger_evolution(&e, s)?, t)?;
                let b = schrodinger_evolution(&e, t + s)?;
                for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
                    law = law.max((x - y).norm() / norm);
                }
            }
        }
    }
    let mut t = Table::new("mixed_norm", &["alpha", "beta", "p_theta", "sample", "value", "exact", "rel_err"]);
    let mut mixed: f64 = 0.0;
    let integer_pairs = [
        pair(-0.5, -0.5),
        pair(-0.25, -0.75),
        pair(0.0, 0.0),
        pair(0.6, -0.6),
        pair(0.5, 0.5),
        pair(1.25, -0.25),
    ];
    for p in integer_pairs {
        for p_theta in [2.0, 3.0] {
            if !p.exponent_range().contains(p_theta) {
                continue;
            }
            let grid = MixedNormGrid::new(&p, modes, MixedNormConfig::for_modes(p_theta, 2.0, modes))?;
            for i in 0..samples {
                let e = sampler.sample(&p, seed, i as u64);
                let m = grid.evaluate(&e)?;
                let (Some(x), Some(err)) = (m.exact, m.rel_err) else {
                    return Err(Error::InvalidArgument(format!("no closed form for {p}")));
                };
                t.push(vec![p.alpha(), p.beta(), p_theta, i as f64, m.value, x, err]);
                mixed = mixed.max(err);
            }
        }
    }
    let mut r = ExperimentReport::new("schrodinger_identities");
    r.seed = Some(seed);
    r.samples = samples;
    r.setting("modes", modes).setting("times", times).setting("group_law_pairs", pairs_law);
    r.checks.push(Check::at_most("unitarity_rel_err", unit, 1e-14));
    r.checks.push(Check::at_most("group_law_err", law, 1e-14));
    r.checks.push(Check::at_most("mixed_norm_rel_err", mixed, 1e-8));
    r.tables.push(t);
    Ok(finish(r))
}

/// Criterion 11.
pub fn audit_reports(cfg: &SuiteConfig) -> Result<Vec<ExperimentReport>> {
    cfg.audits
        .iter()
        .map(|&(a, b, gamma, kind)| cz_audit(pair(a, b), gamma, kind, &cfg.audit_grid, cfg.exec))
        .collect()
}

/// Criterion 12.
pub fn lemma36_reports() -> Result<Vec<ExperimentReport>> {
    let q = default_q_grid();
    default_cases().into_iter().map(|c| lemma36_check(c, &q)).collect()
}

fn run_criterion(id: u32, cfg: &SuiteConfig) -> Result<Vec<ExperimentReport>> {
    let settings = cfg.settings();
    let seed = cfg.seed;
    Ok(match id {
        1 => vec![orthonormality_report(41)?],
        2 => vec![cosine_report(40, 200)?],
        3 => vec![derivative_report(seed, cfg.identity_samples)?],
        4 => vec![caputo_report(seed, 20)?],
        5 => vec![isometry_report(seed, cfg.identity_samples)?],
        6 => vec![composition_report(seed, 10)?],
        7 => p2_equivalence_reports(&SuiteSettings { samples: 20, ..settings })?,
        8 => ratio_suite_reports(&settings)?,
        9 => isomorphism_reports(&settings)?,
        10 => vec![schrodinger_report(seed, cfg.identity_samples)?],
        11 => audit_reports(cfg)?,
        12 => lemma36_reports()?,
        _ => return Err(Error::InvalidArgument(format!("no criterion {id}"))),
    })
}

const NAMES: [&str; 13] = [
    "orthonormality",
    "cosine_degeneration",
    "derivative_identity",
    "caputo_oracle",
    "l2_isometry",
    "composition_identity",
    "p2_equivalence",
    "ratio_suites",
    "isometric_isomorphism",
    "schrodinger",
    "kernel_audits",
    "lemma36",
    "determinism_and_runtime",
];

fn budget(id: u32, cfg: &SuiteConfig) -> Option<u64> {
    match id {
        1 => Some(5_000),
        4 => Some(30_000),
        11 => Some(20 * 60_000),
        13 => Some(cfg.budget_ms),
        _ => None,
    }
}

/// Runs criteria 1 to 12, then reruns them (the audits reduced to their
/// first configuration) and compares the reports byte for byte. Criterion
/// 13 also holds the suite to its time budget.
pub fn run_suite(cfg: &SuiteConfig, mut progress: impl FnMut(&CriterionResult)) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut criteria = Vec::with_capacity(13);
    for id in 1..=12u32 {
        let t = Instant::now();
        let reports = run_criterion(id, cfg)?;
        let c = CriterionResult::new(id, NAMES[id as usize - 1], budget(id, cfg), t, reports);
        progress(&c);
        criteria.push(c);
    }

    let t = Instant::now();
    let rerun_cfg = SuiteConfig {
        audits: cfg.audits.iter().take(1).copied().collect(),
        ..cfg.clone()
    };
    let mut compared = 0usize;
    let mut mismatched = 0usize;
    for c in &criteria {
        let again = run_criterion(c.id, &rerun_cfg)?;
        for (a, b) in c.reports.iter().zip(&again) {
            compared += 1;
            if a.to_json_without_runtime() != b.to_json_without_runtime() {
                mismatched += 1;
            }
        }
    }
    let mut r = ExperimentReport::new("determinism");
    r.seed = Some(cfg.seed);
    r.samples = compared;
    r.setting("suite", cfg.kind).setting("budget_ms", cfg.budget_ms);
    r.checks.push(Check::at_most("mismatched_reports", mismatched as f64, 0.0));
    let mut c = CriterionResult::new(13, NAMES[12], budget(13, cfg), t, vec![finish(r)]);
    c.runtime_ms = start.elapsed().as_millis() as u64;
    c.pass = c.pass && c.budget_ms.is_none_or(|b| c.runtime_ms <= b);
    progress(&c);
    criteria.push(c);

    Ok(SuiteReport {
        suite: cfg.kind,
        config: cfg.clone(),
        pass: criteria.iter().all(|c| c.pass),
        runtime_ms: start.elapsed().as_millis() as u64,
        criteria,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_parse() {
        assert_eq!("smoke".parse::<SuiteKind>().unwrap(), SuiteKind::Smoke);
        assert_eq!("full".parse::<SuiteKind>().unwrap(), SuiteKind::Full);
        assert!(matches!("nightly".parse::<SuiteKind>(), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn gram_of_small_system() {
        assert!(gram_deviation(&pair(0.4, -0.2), 10).unwrap() < 1e-13);
    }

    #[test]
    fn fd_derivative_of_cosine() {
        let p = ParameterPair::chebyshev();
        let e = Expansion::basis(p, 2);
        let d = derivative_fd(&e, 0.8, 1e-3).unwrap();
        let expect = -2.0 * (2.0 / PI).sqrt() * (1.6f64).sin();
        assert!((d.re - expect).abs() < 1e-10);
    }

    #[test]
    fn composition_of_single_mode() {
        let p = pair(0.0, 0.0);
        let e = Expansion::basis(p, 3);
        assert!(composition_defect(&e, 0.6, 2, &[0.7, 1.9]).unwrap() < 1e-9);
    }

    #[test]
    fn full_config_covers_sixteen_audits() {
        let c = SuiteConfig::full();
        assert_eq!(c.audits.len(), 16);
        assert!(c.ratio_samples >= 300);
    }
}
