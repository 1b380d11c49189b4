//! The Schrödinger group `exp(itL)`: evolution, pointwise convergence,
//! the maximal function on interior intervals and mixed `L^p_theta L^q_t`
//! norms.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::expansion::Expansion;
use crate::grid::{uniform_nodes, NormGrid};
use crate::jacobi::PhiEvaluator;
use crate::params::ParameterPair;
use crate::quadrature::QuadratureRule;
use crate::report::{ratio_suite, Check, ExperimentReport, SuiteSettings, Table};
use crate::spaces::PotentialSpace;

/// `exp(i t lambda)`, with `t * lambda` carried as an exact sum `hi + lo`
/// so that large phases lose no more than the final rounding.
pub fn phase(t: f64, lambda: f64) -> Complex64 {
    let hi = t * lambda;
    let lo = t.mul_add(lambda, -hi);
    Complex64::from_polar(1.0, hi) * Complex64::new(lo.cos(), lo.sin())
}

/// `exp(itL) f`.
pub fn schrodinger_evolution(e: &Expansion, t: f64) -> Result<Expansion> {
    if !t.is_finite() {
        return Err(Error::InvalidArgument(format!("time must be finite, got {t}")));
    }
    let p = *e.params();
    let coeffs = e
        .coeffs()
        .iter()
        .enumerate()
        .map(|(n, a)| a * phase(t, p.eigenvalue(n)))
        .collect();
    Expansion::new(p, coeffs)
}

/// `||f||_{L^{2,s}}` from the coefficients (Riesz flavor, Bessel when singular).
pub fn potential_norm_l2(e: &Expansion, s: f64) -> Result<f64> {
    let space = PotentialSpace::standard(*e.params(), 2.0, s)?;
    Ok(space.preimage(e)?.l2_norm())
}

/// Largest frequency difference `lambda_{N-1} - lambda_0` among `modes` modes.
pub fn max_gap(params: &ParameterPair, modes: usize) -> f64 {
    params.eigenvalue_gap(modes.saturating_sub(1))
}

/// Trapezoid size used for `modes` active modes: `max(8 N^2, 64)`.
pub fn default_t_nodes(modes: usize) -> usize {
    (8 * modes * modes).max(64)
}

/// Settings for `||exp(itL) f||_{L^p_theta((0,pi), L^q_t(0,2pi))}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedNormConfig {
    pub p_theta: f64,
    pub q_t: f64,
    /// Uniform trapezoid nodes on `[0, 2 pi)`.
    pub t_nodes: usize,
    pub theta_resolution: usize,
}

impl MixedNormConfig {
    pub fn for_modes(p_theta: f64, q_t: f64, modes: usize) -> Self {
        Self {
            p_theta,
            q_t,
            t_nodes: default_t_nodes(modes),
            theta_resolution: (4 * modes).max(64),
        }
    }

    pub fn validate(&self, params: &ParameterPair, modes: usize) -> Result<()> {
        if !(self.q_t >= 2.0 && self.q_t.is_finite()) {
            return Err(Error::InvalidArgument(format!("q_t must be finite and >= 2, got {}", self.q_t)));
        }
        if !self.p_theta.is_infinite() {
            params.exponent_range().check(self.p_theta)?;
        }
        let gap = max_gap(params, modes);
        if (self.t_nodes as f64) <= 2.0 * gap {
            return Err(Error::UnderResolved(format!(
                "{} time nodes cannot resolve frequency gap {gap}; need more than {}",
                self.t_nodes,
                2.0 * gap
            )));
        }
        Ok(())
    }
}

/// Row-major `t_nodes x modes` table of `exp(i t_j lambda_n)` on `[0, 2 pi)`.
fn phase_table(params: &ParameterPair, modes: usize, t_nodes: usize, window: f64) -> Vec<Complex64> {
    let dt = window / t_nodes as f64;
    let lam: Vec<f64> = (0..modes).map(|n| params.eigenvalue(n)).collect();
    (0..t_nodes)
        .flat_map(|j| {
            let t = j as f64 * dt;
            lam.iter().map(move |&l| phase(t, l)).collect::<Vec<_>>()
        })
        .collect()
}

/// Precomputed grid for repeated mixed norms at a fixed pair and mode count.
pub struct MixedNormGrid {
    cfg: MixedNormConfig,
    grid: NormGrid,
    phases: Vec<Complex64>,
    modes: usize,
}

/// Mixed norm by quadrature, with the closed form when it is available.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedNorm {
    pub value: f64,
    /// `(int (2 pi sum |a_n|^2 phi_n^2)^{p/2})^{1/p}`, only for `q_t = 2`
    /// and integer `alpha + beta`.
    pub exact: Option<f64>,
    pub rel_err: Option<f64>,
}

impl MixedNormGrid {
    pub fn new(params: &ParameterPair, modes: usize, cfg: MixedNormConfig) -> Result<Self> {
        let modes = modes.max(1);
        cfg.validate(params, modes)?;
        Ok(Self {
            cfg,
            grid: NormGrid::new(params, modes, cfg.p_theta, cfg.theta_resolution)?,
            phases: phase_table(params, modes, cfg.t_nodes, 2.0 * PI),
            modes,
        })
    }

    pub fn config(&self) -> &MixedNormConfig {
        &self.cfg
    }

    pub fn evaluate(&self, e: &Expansion) -> Result<MixedNorm> {
        if e.params() != self.grid.params() {
            return Err(Error::mismatch(*self.grid.params(), *e.params()));
        }
        if e.len() > self.modes {
            return Err(Error::ResolutionMismatch {
                nodes: self.modes,
                modes: e.len(),
            });
        }
        let a = e.coeffs();
        let q = self.cfg.q_t;
        let dt = 2.0 * PI / self.cfg.t_nodes as f64;
        let exact_ok = q == 2.0 && self.grid.params().has_integer_sum();
        let mut inner = Vec::with_capacity(self.grid.nodes().len());
        let mut inner_exact = Vec::new();
        let mut c = vec![Complex64::new(0.0, 0.0); a.len()];
        for row in self.grid.basis().chunks(self.modes) {
            for (k, (x, &b)) in a.iter().zip(row).enumerate() {
                c[k] = x * b;
            }
            let s: f64 = self
                .phases
                .chunks(self.modes)
                .map(|ph| {
                    let u: Complex64 = c.iter().zip(ph).map(|(x, y)| x * y).sum();
                    if q == 2.0 {
                        u.norm_sqr()
                    } else {
                        u.norm().powf(q)
                    }
                })
                .sum();
            inner.push((dt * s).powf(1.0 / q));
            if exact_ok {
                inner_exact.push((2.0 * PI * c.iter().map(|x| x.norm_sqr()).sum::<f64>()).sqrt());
            }
        }
        let value = self.grid.norm_of_samples(&inner);
        let exact = exact_ok.then(|| self.grid.norm_of_samples(&inner_exact));
        let rel_err = exact.map(|x| (value - x).abs() / x.max(f64::MIN_POSITIVE));
        if !value.is_finite() {
            return Err(Error::NonFinite(0));
        }
        Ok(MixedNorm { value, exact, rel_err })
    }
}

pub fn mixed_norm(e: &Expansion, cfg: &MixedNormConfig) -> Result<MixedNorm> {
    MixedNormGrid::new(e.params(), e.len(), *cfg)?.evaluate(e)
}

/// `max_theta |exp(itL) f - f|` on a midpoint grid of `m` points for each `t`,
/// as a `(t, sup_error)` table, with the bound `t sum lambda_n |a_n| max|phi_n|`.
pub fn convergence_experiment(e: &Expansion, ts: &[f64], m: usize) -> Result<ExperimentReport> {
    let start = Instant::now();
    let params = *e.params();
    let nodes = uniform_nodes(m);
    let n = e.len().max(1);
    let basis = PhiEvaluator::new(&params, n).phi_matrix(&nodes, n);
    let sup_phi: Vec<f64> = (0..e.len())
        .map(|k| basis.chunks(n).map(|r| r[k].abs()).fold(0.0, f64::max))
        .collect();
    let lipschitz: f64 = e
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, a)| params.eigenvalue(k) * a.norm() * sup_phi[k])
        .sum();
    let sup_f = e.synthesize_on(&nodes).iter().map(|v| v.norm()).fold(0.0, f64::max);

    let mut table = Table::new("convergence", &["t", "sup_error", "bound"]);
    let mut errors = Vec::with_capacity(ts.len());
    for &t in ts {
        let diff: Vec<Complex64> = e
            .coeffs()
            .iter()
            .enumerate()
            .map(|(k, a)| a * (phase(t, params.eigenvalue(k)) - 1.0))
            .collect();
        let err = basis
            .chunks(n)
            .map(|row| diff.iter().zip(row).map(|(x, &b)| x * b).sum::<Complex64>().norm())
            .fold(0.0, f64::max);
        table.push(vec![t, err, t.abs() * lipschitz]);
        errors.push(err);
    }

    let mut report = ExperimentReport::new("schrodinger_convergence");
    report.params = Some(params);
    report.setting("theta_grid", m).setting("modes", e.len()).setting("t_sequence", ts);
    let floor = 1e-12 * sup_f.max(f64::MIN_POSITIVE);
    let worst_excess = ts
        .iter()
        .zip(&errors)
        .map(|(&t, &err)| err - t.abs() * lipschitz - floor)
        .fold(f64::NEG_INFINITY, f64::max);
    report.checks.push(Check::at_most("error_minus_linear_bound", worst_excess, 0.0));
    // Along decreasing |t| the error must not grow beyond rounding.
    let mut order: Vec<usize> = (0..ts.len()).collect();
    order.sort_by(|&i, &j| ts[j].abs().total_cmp(&ts[i].abs()));
    let growth = order
        .windows(2)
        .map(|w| errors[w[1]] - errors[w[0]] - floor)
        .fold(0.0, f64::max);
    report.checks.push(Check::at_most("growth_as_t_decreases", growth, 0.0));
    report.stats = crate::report::Stats::from_values(&errors);
    report.samples = 1;
    report.ratios = errors;
    report.tables.push(table);
    report.finish_from_checks();
    report.runtime_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

/// Grid for `int_{I_N} T_* f`, `I_N = [1/N, pi - 1/N]`, with `T_*` taken
/// as a maximum over a uniform `t` grid on `[0, 2 pi)`.
pub struct MaximalGrid {
    params: ParameterPair,
    modes: usize,
    weights: Vec<f64>,
    basis: Vec<f64>,
    phases: Vec<Complex64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaximalBound {
    /// `int_{I_N} max_t |exp(itL) f|`.
    pub lhs: f64,
    /// `sum |a_n| int_{I_N} |phi_n|`, an upper bound for the exact lhs.
    pub hard_bound: f64,
    pub potential_norm: f64,
    pub ratio: f64,
}

impl MaximalGrid {
    pub fn new(params: &ParameterPair, modes: usize, n_interval: u32, theta_nodes: usize, t_nodes: usize) -> Result<Self> {
        let lo = 1.0 / n_interval as f64;
        if !(n_interval >= 1 && lo < PI - lo) {
            return Err(Error::InvalidArgument(format!("interval index N={n_interval} leaves an empty interval")));
        }
        let modes = modes.max(1);
        let rule = QuadratureRule::gauss_legendre(theta_nodes, lo, PI - lo)?;
        Ok(Self {
            params: *params,
            modes,
            weights: rule.weights().to_vec(),
            basis: PhiEvaluator::new(params, modes).phi_matrix(rule.nodes(), modes),
            phases: phase_table(params, modes, t_nodes, 2.0 * PI),
        })
    }

    pub fn evaluate(&self, e: &Expansion, s: f64) -> Result<MaximalBound> {
        if e.params() != &self.params {
            return Err(Error::mismatch(self.params, *e.params()));
        }
        if e.len() > self.modes {
            return Err(Error::ResolutionMismatch {
                nodes: self.modes,
                modes: e.len(),
            });
        }
        let a = e.coeffs();
        let mut lhs = 0.0;
        let mut int_abs = vec![0.0; a.len()];
        let mut c = vec![Complex64::new(0.0, 0.0); a.len()];
        for (row, &w) in self.basis.chunks(self.modes).zip(&self.weights) {
            for (k, (x, &b)) in a.iter().zip(row).enumerate() {
                c[k] = x * b;
                int_abs[k] += w * b.abs();
            }
            let t_star = self
                .phases
                .chunks(self.modes)
                .map(|ph| c.iter().zip(ph).map(|(x, y)| x * y).sum::<Complex64>().norm())
                .fold(0.0, f64::max);
            lhs += w * t_star;
        }
        let hard_bound = a.iter().zip(&int_abs).map(|(x, i)| x.norm() * i).sum();
        let norm = potential_norm_l2(e, s)?;
        Ok(MaximalBound {
            lhs,
            hard_bound,
            potential_norm: norm,
            ratio: lhs / norm,
        })
    }
}

pub fn maximal_bound_check(e: &Expansion, s: f64, n_interval: u32, theta_nodes: usize, t_nodes: usize) -> Result<MaximalBound> {
    MaximalGrid::new(e.params(), e.len(), n_interval, theta_nodes, t_nodes)?.evaluate(e, s)
}

fn schrodinger_report(name: &str, params: &ParameterPair, p: Option<f64>, s: f64, settings: &SuiteSettings) -> ExperimentReport {
    let mut r = ExperimentReport::new(name);
    r.params = Some(*params);
    r.p = p;
    r.s_or_gamma = Some(s);
    r.seed = Some(settings.seed);
    r.setting("samples", settings.samples)
        .setting("modes", settings.sampler.modes)
        .setting("decay", settings.sampler.decay)
        .setting("resolution", settings.resolution)
        .setting("refined_resolution", 2 * settings.resolution);
    r
}

/// Time nodes at grid resolution `res`, scaled from the default trapezoid
/// size at the base resolution.
fn scaled_t_nodes(modes: usize, res: usize, base: usize) -> usize {
    default_t_nodes(modes) * res / base.max(1)
}

/// Ratio suite for `int_{I_N} T_* f / ||f||_{L^{2,s}}`, `s > 1/2`.
pub fn maximal_experiment(params: &ParameterPair, s: f64, n_interval: u32, settings: &SuiteSettings) -> Result<ExperimentReport> {
    if !(s > 0.5) {
        return Err(Error::InvalidArgument(format!("maximal bound needs s > 1/2, got {s}")));
    }
    let start = Instant::now();
    let modes = settings.sampler.modes;
    let base = settings.resolution;
    let mut report = schrodinger_report("schrodinger_maximal", params, None, s, settings);
    report.setting("interval_index", n_interval)
        .setting("t_window", "[0, 2pi)")
        .setting("t_nodes", scaled_t_nodes(modes, base, base));
    let worst_excess = std::sync::Mutex::new(f64::NEG_INFINITY);
    let outcome = ratio_suite(
        params,
        settings,
        |res| MaximalGrid::new(params, modes, n_interval, res, scaled_t_nodes(modes, res, base)),
        |e, g| {
            let m = g.evaluate(e, s)?;
            let mut w = worst_excess.lock().expect("no poisoning");
            *w = w.max(m.lhs - m.hard_bound * (1.0 + 1e-12));
            Ok(m.ratio)
        },
    )?;
    outcome.fill(&mut report, false);
    let excess = worst_excess.into_inner().expect("no poisoning");
    report.checks.push(Check::at_most("lhs_minus_hard_bound", excess, 0.0));
    report.pass = Some(report.checks.iter().all(|c| c.pass));
    if !params.has_integer_sum() {
        report
            .notes
            .push("alpha + beta is not an integer: the t window does not cover a full period, so T_* is underestimated".into());
    }
    report.runtime_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

fn strichartz_threshold(params: &ParameterPair) -> f64 {
    0.5 + params.alpha().max(params.beta()).max(-0.5)
}

fn mixed_suite(
    name: &str,
    params: &ParameterPair,
    p: f64,
    q: f64,
    s: f64,
    norm_s: f64,
    settings: &SuiteSettings,
) -> Result<ExperimentReport> {
    if !(s > 0.0 && s >= strichartz_threshold(params)) {
        return Err(Error::Inadmissible(format!(
            "s={s} must be positive and at least 1/2 + max(alpha, beta, -1/2) = {}",
            strichartz_threshold(params)
        )));
    }
    let start = Instant::now();
    let modes = settings.sampler.modes;
    let base = settings.resolution;
    let mut report = schrodinger_report(name, params, Some(p), s, settings);
    report.setting("q_t", q)
        .setting("t_nodes", scaled_t_nodes(modes, base, base))
        .setting("potential_order", norm_s);
    let outcome = ratio_suite(
        params,
        settings,
        |res| {
            let cfg = MixedNormConfig {
                p_theta: p,
                q_t: q,
                t_nodes: scaled_t_nodes(modes, res, base),
                theta_resolution: res,
            };
            MixedNormGrid::new(params, modes, cfg)
        },
        |e, g| Ok(g.evaluate(e)?.value / potential_norm_l2(e, norm_s)?),
    )?;
    outcome.fill(&mut report, false);
    if !params.has_integer_sum() {
        report.pass = None;
        report
            .notes
            .push("alpha + beta is not an integer: exploratory run, no conclusion drawn".into());
    }
    report.runtime_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

/// Ratio suite for `||exp(itL) f||_{L^p_theta L^2_t} / ||f||_{L^{2,s}}`.
pub fn strichartz_experiment(params: &ParameterPair, p: f64, s: f64, settings: &SuiteSettings) -> Result<ExperimentReport> {
    mixed_suite("strichartz", params, p, 2.0, s, s, settings)
}

/// Ratio suite for `||exp(itL) f||_{L^p_theta L^q_t} / ||f||_{L^{2,s+1-2/q}}`, `q > 2`.
pub fn extension_experiment(params: &ParameterPair, p: f64, q: f64, s: f64, settings: &SuiteSettings) -> Result<ExperimentReport> {
    if !(q > 2.0 && q.is_finite()) {
        return Err(Error::InvalidArgument(format!("extension needs finite q > 2, got {q}")));
    }
    mixed_suite("strichartz_extension", params, p, q, s, s + 1.0 - 2.0 / q, settings)
}

/// Largest relative deviation between `|exp(itL) f|` at `t` and `t + 2 pi`
/// over a midpoint grid of `m` points and the given times.
pub fn periodicity_defect(e: &Expansion, ts: &[f64], m: usize) -> Result<f64> {
    let nodes = uniform_nodes(m);
    let mut worst: f64 = 0.0;
    for &t in ts {
        let a = schrodinger_evolution(e, t)?.synthesize_on(&nodes);
        let b = schrodinger_evolution(e, t + 2.0 * PI)?.synthesize_on(&nodes);
        let scale = a.iter().map(|v| v.norm()).fold(f64::MIN_POSITIVE, f64::max);
        for (x, y) in a.iter().zip(&b) {
            worst = worst.max((x.norm() - y.norm()).abs() / scale);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansion::ExpansionSampler;
    use crate::grid::NormGrid;
    use approx::assert_relative_eq;

    #[test]
    fn identity_and_unitarity() {
        let p = ParameterPair::new(0.3, -0.6).unwrap();
        let e = ExpansionSampler::default().sample(&p, 1, 0);
        assert_eq!(schrodinger_evolution(&e, 0.0).unwrap(), e);
        let u = schrodinger_evolution(&e, 1.7).unwrap();
        assert_relative_eq!(u.l2_norm(), e.l2_norm(), max_relative = 1e-14);
    }

    #[test]
    fn integer_sum_period() {
        let p = ParameterPair::new(0.5, 0.5).unwrap();
        let e = ExpansionSampler::default().sample(&p, 2, 0);
        let u = schrodinger_evolution(&e, 2.0 * PI).unwrap();
        let g = phase(2.0 * PI, p.eigenvalue(0));
        for (x, y) in u.coeffs().iter().zip(e.coeffs()) {
            assert!((x - g * y).norm() <= 1e-12 * y.norm().max(1e-300));
        }
    }

    #[test]
    fn mixed_norm_single_mode() {
        let p = ParameterPair::new(0.0, 0.0).unwrap();
        let e = Expansion::basis(p, 3);
        let cfg = MixedNormConfig::for_modes(3.0, 2.0, 4);
        let m = mixed_norm(&e, &cfg).unwrap();
        let lp = NormGrid::new(&p, 4, 3.0, cfg.theta_resolution).unwrap().norm(&e).unwrap();
        assert_relative_eq!(m.value, (2.0 * PI).sqrt() * lp, max_relative = 1e-12);
        assert!(m.rel_err.unwrap() < 1e-12);
    }

    #[test]
    fn nyquist_rejection() {
        let p = ParameterPair::new(0.0, 0.0).unwrap();
        let e = Expansion::basis(p, 15);
        let cfg = MixedNormConfig {
            p_theta: 2.0,
            q_t: 2.0,
            t_nodes: 100,
            theta_resolution: 64,
        };
        assert!(matches!(mixed_norm(&e, &cfg), Err(Error::UnderResolved(_))));
    }

    #[test]
    fn maximal_single_mode() {
        let p = ParameterPair::new(0.2, 0.1).unwrap();
        let e = Expansion::basis(p, 0);
        let m = maximal_bound_check(&e, 1.0, 4, 64, 64).unwrap();
        assert_relative_eq!(m.lhs, m.hard_bound, max_relative = 1e-13);
        assert_relative_eq!(m.ratio, m.hard_bound / p.eigenvalue(0).sqrt(), max_relative = 1e-13);
    }

    #[test]
    fn convergence_of_bottom_mode() {
        let p = ParameterPair::new(0.0, 0.0).unwrap();
        let e = Expansion::basis(p, 0);
        let ts = [1.0, 0.1, 0.01, 0.0];
        let r = convergence_experiment(&e, &ts, 200).unwrap();
        assert_eq!(r.pass, Some(true));
        let sup0 = uniform_nodes(200)
            .iter()
            .map(|&t| crate::jacobi::phi(0, &p, t).unwrap().abs())
            .fold(0.0, f64::max);
        for (&t, &err) in ts.iter().zip(&r.ratios) {
            let expect = (phase(t, p.eigenvalue(0)) - 1.0).norm() * sup0;
            assert_relative_eq!(err, expect, max_relative = 1e-12, epsilon = 1e-300);
        }
    }
}
