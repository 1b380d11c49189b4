//! Potential spaces `L^{p,s}` and the Monte-Carlo experiments on them:
//! inclusions, derivative and Riesz-transform bounds, embeddings, and the
//! square-function characterizations.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma as gamma_fn;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::expansion::Expansion;
use crate::fractional::SquareFunction;
use crate::grid::NormGrid;
use crate::params::ParameterPair;
use crate::report::{ratio_suite, Check, ExperimentReport, SuiteSettings, Table};
use crate::spectral::{higher_derivative, riesz_transform, PotentialKind};
use crate::timequad::TimeQuadrature;

/// `L^{p,s}_{alpha,beta}`: the image of `L^p` under the order-`s`
/// potential of the given flavor, normed by the preimage.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpace {
    pub params: ParameterPair,
    pub p: f64,
    pub s: f64,
    pub flavor: PotentialKind,
}

impl PotentialSpace {
    pub fn new(params: ParameterPair, p: f64, s: f64, flavor: PotentialKind) -> Result<Self> {
        params.exponent_range().check(p)?;
        if !(s >= 0.0) {
            return Err(Error::InvalidArgument(format!("smoothness must be >= 0, got {s}")));
        }
        flavor.check(&params)?;
        Ok(Self { params, p, s, flavor })
    }

    /// Riesz flavor, or Bessel when the pair is singular.
    pub fn standard(params: ParameterPair, p: f64, s: f64) -> Result<Self> {
        let flavor = if params.is_singular() {
            PotentialKind::Bessel
        } else {
            PotentialKind::Riesz
        };
        Self::new(params, p, s, flavor)
    }

    /// Riesz flavor, or the modified potential when the pair is singular.
    pub fn for_square_functions(params: ParameterPair, p: f64, s: f64) -> Result<Self> {
        let flavor = if params.is_singular() {
            PotentialKind::Modified
        } else {
            PotentialKind::Riesz
        };
        Self::new(params, p, s, flavor)
    }

    pub fn with_s(&self, s: f64) -> Self {
        Self { s, ..*self }
    }

    /// Coefficients of `g` with `f = potential(g)`.
    pub fn preimage(&self, e: &Expansion) -> Result<Expansion> {
        if e.params() != &self.params {
            return Err(Error::mismatch(self.params, *e.params()));
        }
        self.flavor.apply(e, self.s, true)
    }

    pub fn norm_on(&self, e: &Expansion, grid: &NormGrid) -> Result<f64> {
        grid.norm(&self.preimage(e)?)
    }
}

/// Default resolution for one-off norms: generous relative to the mode count.
fn default_resolution(modes: usize) -> usize {
    (4 * modes).max(64)
}

pub fn potential_norm(e: &Expansion, space: &PotentialSpace) -> Result<f64> {
    let grid = NormGrid::new(&space.params, e.len(), space.p, default_resolution(e.len()))?;
    space.norm_on(e, &grid)
}

fn base_report(name: &str, params: &ParameterPair, p: f64, s: f64, k: Option<u32>, settings: &SuiteSettings) -> ExperimentReport {
    let mut r = ExperimentReport::new(name);
    r.params = Some(*params);
    r.p = Some(p);
    r.s_or_gamma = Some(s);
    r.k = k;
    r.seed = Some(settings.seed);
    r.setting("samples", settings.samples)
        .setting("modes", settings.sampler.modes)
        .setting("decay", settings.sampler.decay)
        .setting("resolution", settings.resolution)
        .setting("refined_resolution", 2 * settings.resolution);
    r
}

/// Which structural statement a [`structural_experiment`] probes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "case")]
pub enum StructuralCase {
    /// `||f||_{L^{p,r}} / ||f||_{L^{p,s}}` for `r < s`, plus the exact
    /// isometry `L^{-(s-r)/2}: L^{p,r} -> L^{p,s}`.
    Inclusion { r: f64 },
    /// `||D^{(k)} f||_{L^{p,s-k}_{alpha+k,beta+k}} / ||f||_{L^{p,s}}`, `k < s`.
    Derivative { k: u32 },
    /// `||R^k f||_{L^{p,s}_{alpha+k,beta+k}} / ||f||_{L^{p,s}}`.
    RieszTransform { k: u32 },
}

struct StructCtx {
    src: NormGrid,
    dst: NormGrid,
}

pub fn structural_experiment(space: &PotentialSpace, case: StructuralCase, settings: &SuiteSettings) -> Result<ExperimentReport> {
    let start = Instant::now();
    let params = space.params;
    let modes = settings.sampler.modes;
    let (name, k, target_space) = match case {
        StructuralCase::Inclusion { r } => {
            if !(r < space.s) || r < 0.0 {
                return Err(Error::InvalidArgument(format!("need 0 <= r < s, got r={r}, s={}", space.s)));
            }
            ("struct_inclusion", None, space.with_s(r))
        }
        StructuralCase::Derivative { k } => {
            if !((k as f64) < space.s) {
                return Err(Error::InvalidArgument(format!("derivative order k={k} must be below s={}", space.s)));
            }
            let t = PotentialSpace::standard(params.shifted(k as usize), space.p, space.s - k as f64)?;
            ("struct_derivative", Some(k), t)
        }
        StructuralCase::RieszTransform { k } => {
            let t = PotentialSpace::standard(params.shifted(k as usize), space.p, space.s)?;
            ("struct_riesz_transform", Some(k), t)
        }
    };
    let mut report = base_report(name, &params, space.p, space.s, k, settings);
    report.setting("flavor", space.flavor).setting("case", case).setting("target", target_space);

    let out_modes = modes;
    let outcome = ratio_suite(
        &params,
        settings,
        |res| {
            Ok(StructCtx {
                src: NormGrid::new(&params, modes, space.p, res)?,
                dst: NormGrid::new(&target_space.params, out_modes, space.p, res)?,
            })
        },
        |e, ctx| {
            let denom = space.norm_on(e, &ctx.src)?;
            let numer = match case {
                StructuralCase::Inclusion { .. } => target_space.norm_on(e, &ctx.src)?,
                StructuralCase::Derivative { k } => target_space.norm_on(&higher_derivative(e, k as usize)?, &ctx.dst)?,
                StructuralCase::RieszTransform { k } => target_space.norm_on(&riesz_transform(e, k as usize)?, &ctx.dst)?,
            };
            Ok(numer / denom)
        },
    )?;
    outcome.fill(&mut report, false);

    if let StructuralCase::Inclusion { r } = case {
        let err = isometry_error(space, r, settings)?;
        report.checks.push(Check::at_most("isometry_max_rel_err", err, 1e-12));
        report.pass = Some(report.checks.iter().all(|c| c.pass));
    }
    report.runtime_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

/// Largest relative coefficient mismatch between the preimages of
/// `f` in `L^{p,r}` and of `L^{-(s-r)/2} f` in `L^{p,s}`, over the sample set.
pub fn isometry_error(space: &PotentialSpace, r: f64, settings: &SuiteSettings) -> Result<f64> {
    let low = space.with_s(r);
    let mut worst: f64 = 0.0;
    for i in 0..settings.samples {
        let e = settings.sampler.sample(&space.params, settings.seed, i as u64);
        let lifted = space.flavor.apply(&e, space.s - r, false)?;
        let a = space.preimage(&lifted)?;
        let b = low.preimage(&e)?;
        let scale = b.l2_norm().max(f64::MIN_POSITIVE);
        for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
            worst = worst.max((x - y).norm() / scale);
        }
    }
    Ok(worst)
}

/// Whether `(p, q, s)` is admissible for the embedding into `L^q`.
pub fn embedding_admissible(space: &PotentialSpace, q: f64) -> Result<()> {
    let (a, b) = (space.params.alpha(), space.params.beta());
    if q.is_infinite() {
        if a < -0.5 || b < -0.5 {
            return Err(Error::Inadmissible(format!(
                "q = infinity needs alpha, beta >= -1/2 (got {})",
                space.params
            )));
        }
        if !(space.s > 1.0 / space.p) {
            return Err(Error::Inadmissible(format!(
                "q = infinity needs s > 1/p (got s={}, p={})",
                space.s, space.p
            )));
        }
        return Ok(());
    }
    if !(q >= 1.0) {
        return Err(Error::Inadmissible(format!("q must be >= 1, got {q}")));
    }
    let upper = space.params.exponent_range().upper;
    if !(q < upper) {
        return Err(Error::Inadmissible(format!("q={q} must stay below p(alpha,beta)={upper}")));
    }
    if 1.0 / q < 1.0 / space.p - space.s {
        return Err(Error::Inadmissible(format!(
            "1/q >= 1/p - s fails: 1/{q} < 1/{} - {}",
            space.p, space.s
        )));
    }
    Ok(())
}

pub fn embedding_experiment(space: &PotentialSpace, q: f64, settings: &SuiteSettings) -> Result<ExperimentReport> {
    embedding_admissible(space, q)?;
    let start = Instant::now();
    let params = space.params;
    let modes = settings.sampler.modes;
    let mut report = base_report("embed", &params, space.p, space.s, None, settings);
    report.setting("q", if q.is_infinite() { serde_json::json!("inf") } else { serde_json::json!(q) })
        .setting("flavor", space.flavor);
    // Sup norms are taken on a finer midpoint grid than the quadrature rules.
    let q_scale = if q.is_infinite() { 4 } else { 1 };
    let outcome = ratio_suite(
        &params,
        settings,
        |res| Ok((NormGrid::new(&params, modes, space.p, res)?, NormGrid::new(&params, modes, q, q_scale * res)?)),
        |e, (pg, qg)| Ok(qg.norm(e)? / space.norm_on(e, pg)?),
    )?;
    outcome.fill(&mut report, false);
    report.runtime_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

/// `sqrt(Gamma(2 rho)) / 2^rho`, the `L^2` constant of a square function
/// with weight exponent `rho`.
pub fn l2_constant(rho: f64) -> f64 {
    gamma_fn(2.0 * rho).sqrt() / 2f64.powf(rho)
}

struct SqCtx {
    grid: NormGrid,
    tq: TimeQuadrature,
}

fn square_ctx(params: &ParameterPair, modes: usize, p: f64, res: usize, kind: SquareFunction) -> Result<SqCtx> {
    let tq = kind
        .time_quadrature(params, modes)?
        .ok_or_else(|| Error::InvalidArgument("square function vanishes identically".into()))?;
    Ok(SqCtx {
        grid: NormGrid::new(params, modes, p, res)?,
        tq,
    })
}

/// `||g^{gamma,k} f||_p / ||f||_{L^{p,gamma}}`, routed to the modified
/// square function and modified potential space for singular pairs.
pub fn equivalence_experiment(params: &ParameterPair, p: f64, gamma: f64, k: u32, settings: &SuiteSettings) -> Result<ExperimentReport> {
    let start = Instant::now();
    let space = PotentialSpace::for_square_functions(*params, p, gamma)?;
    let kind = if params.is_singular() {
        SquareFunction::ModifiedHigher { gamma, k }
    } else {
        SquareFunction::Higher { gamma, k }
    };
    kind.validate()?;
    let modes = settings.sampler.modes;
    let mut report = base_report("equiv", params, p, gamma, Some(k), settings);
    report.setting("flavor", space.flavor)
        .setting("square_function", if params.is_singular() { "modified" } else { "standard" });
    let outcome = ratio_suite(
        params,
        settings,
        |res| square_ctx(params, modes, p, res, kind),
        |e, ctx| {
            let g = ctx.grid.square_function_samples(kind, e, &ctx.tq, Execution::Sequential)?;
            Ok(ctx.grid.norm_of_samples(&g) / space.norm_on(e, &ctx.grid)?)
        },
    )?;
    outcome.fill(&mut report, true);
    let c = l2_constant(kind.rho());
    report.setting("l2_constant", c);
    if p == 2.0 {
        let spread = report.ratios.iter().map(|r| (r - c).abs() / c).fold(0.0, f64::max);
        report.checks.push(Check::at_most("p2_max_rel_dev_from_constant", spread, 1e-5));
        report.pass = Some(report.checks.iter().all(|c| c.pass));
    }
    report.runtime_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

/// Two-sided statistic for `||f||_p` against `||g^gamma f||_p` plus the
/// bottom coefficient for singular pairs:
/// `((2^gamma / sqrt(Gamma(2 gamma)) ||g^gamma f||_p)^2 + chi |a_0|^2)^{1/2} / ||f||_p`,
/// which is identically 1 at `p = 2`.
pub fn gfunction_norm_experiment(params: &ParameterPair, p: f64, gamma: f64, settings: &SuiteSettings) -> Result<ExperimentReport> {
    let start = Instant::now();
    params.exponent_range().check(p)?;
    let kind = SquareFunction::Fractional { gamma };
    kind.validate()?;
    let modes = settings.sampler.modes;
    let chi = if params.is_singular() { 1.0 } else { 0.0 };
    let scale = 1.0 / l2_constant(gamma);
    let mut report = base_report("gfunc_norm", params, p, gamma, None, settings);
    report.setting("combination", "l2");
    let outcome = ratio_suite(
        params,
        settings,
        |res| square_ctx(params, modes, p, res, kind),
        |e, ctx| {
            let g = ctx.grid.square_function_samples(kind, e, &ctx.tq, Execution::Sequential)?;
            let gn = scale * ctx.grid.norm_of_samples(&g);
            let a0 = e.coeffs().first().map(|c| c.norm()).unwrap_or(0.0);
            let rhs = (gn * gn + chi * a0 * a0).sqrt();
            Ok(rhs / ctx.grid.norm(e)?)
        },
    )?;
    outcome.fill(&mut report, true);
    if p == 2.0 {
        let dev = report.ratios.iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max);
        report.checks.push(Check::at_most("p2_max_rel_dev_from_one", dev, 1e-6));
        report.pass = Some(report.checks.iter().all(|c| c.pass));
    }
    report.runtime_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

/// Weighted polynomial-setting statistic
/// `||g^gamma F||_{L^p(w d mu)} / ||F||_{L^p(w d mu)}` for random
/// `F = sum b_n \mathcal P_n`.
pub fn weighted_gfunction_experiment(params: &ParameterPair, p: f64, gamma: f64, settings: &SuiteSettings) -> Result<ExperimentReport> {
    let start = Instant::now();
    params.exponent_range().check(p)?;
    let kind = SquareFunction::Fractional { gamma };
    kind.validate()?;
    let modes = settings.sampler.modes;
    let mut report = base_report("gfunc_weighted", params, p, gamma, None, settings);
    report.setting("weight", "Psi^p / Psi^{2alpha+1/2,2beta+1/2}");
    let outcome = ratio_suite(
        params,
        settings,
        |res| {
            let tq = kind
                .time_quadrature(params, modes)?
                .ok_or_else(|| Error::InvalidArgument("square function vanishes identically".into()))?;
            Ok(SqCtx {
                grid: NormGrid::power_weighted(params, modes, p, res)?,
                tq,
            })
        },
        |e, ctx| {
            // The sampled coefficients are read as polynomial coefficients.
            let g = ctx.grid.square_function_samples(kind, e, &ctx.tq, Execution::Sequential)?;
            Ok(ctx.grid.norm_of_samples(&g) / ctx.grid.norm(e)?)
        },
    )?;
    outcome.fill(&mut report, !params.is_singular());
    report.runtime_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

/// `||f||_{L^{p,r}} / ||f||_{L^{p,s}}` for the single mode `phi_n`.
pub fn single_mode_inclusion_ratio(space: &PotentialSpace, r: f64, n: usize) -> Result<f64> {
    let e = Expansion::basis(space.params, n);
    Ok(potential_norm(&e, &space.with_s(r))? / potential_norm(&e, space)?)
}

/// `||f||_{L^{p,s}}` of sampled expansions for each `s`. Exploratory, except
/// that at `p = 2` the grid norm must match the coefficient norm of the
/// preimage.
pub fn norms_experiment(params: &ParameterPair, p: f64, s_values: &[f64], settings: &SuiteSettings) -> Result<ExperimentReport> {
    let start = Instant::now();
    let modes = settings.sampler.modes;
    let grid = NormGrid::new(params, modes, p, settings.resolution)?;
    let spaces = s_values
        .iter()
        .map(|&s| PotentialSpace::standard(*params, p, s))
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new("norms", &["sample", "s", "norm"]);
    let mut parseval: f64 = 0.0;
    for i in 0..settings.samples {
        let e = settings.sampler.sample(params, settings.seed, i as u64);
        for sp in &spaces {
            let v = sp.norm_on(&e, &grid)?;
            table.push(vec![i as f64, sp.s, v]);
            if p == 2.0 {
                let c = sp.preimage(&e)?.l2_norm();
                parseval = parseval.max((v - c).abs() / c.max(f64::MIN_POSITIVE));
            }
        }
    }
    let mut r = base_report("norms", params, p, s_values.first().copied().unwrap_or(0.0), None, settings);
    r.s_or_gamma = None;
    r.setting("s_values", s_values).setting("flavor", spaces.first().map(|s| s.flavor));
    if p == 2.0 {
        r.checks.push(Check::at_most("parseval_rel_err", parseval, 1e-10));
        r.finish_from_checks();
    }
    r.tables.push(table);
    r.runtime_ms = start.elapsed().as_millis() as u64;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn small() -> SuiteSettings {
        SuiteSettings {
            samples: 12,
            resolution: 64,
            ..Default::default()
        }
    }

    #[test]
    fn single_mode_riesz_norm() {
        let p = ParameterPair::new(0.0, 0.0).unwrap();
        let space = PotentialSpace::standard(p, 2.0, 1.3).unwrap();
        let n = 4;
        let v = potential_norm(&Expansion::basis(p, n), &space).unwrap();
        assert_relative_eq!(v, p.eigenvalue(n).powf(0.65), max_relative = 1e-12);
    }

    #[test]
    fn riesz_flavor_rejected_when_singular() {
        let r = PotentialSpace::new(ParameterPair::chebyshev(), 2.0, 1.0, PotentialKind::Riesz);
        assert!(matches!(r, Err(Error::SingularPair { .. })));
    }

    #[test]
    fn embedding_preconditions() {
        let p = ParameterPair::new(0.0, 0.0).unwrap();
        let sp = PotentialSpace::standard(p, 2.0, 0.25).unwrap();
        assert!(embedding_admissible(&sp, 8.0).is_err());
        assert!(embedding_admissible(&sp, 4.0).is_ok());
        assert!(embedding_admissible(&sp, f64::INFINITY).is_err());
        let q = ParameterPair::new(-0.75, 0.0).unwrap();
        let sq = PotentialSpace::standard(q, 2.0, 1.0).unwrap();
        assert!(embedding_admissible(&sq, f64::INFINITY).is_err());
    }

    #[test]
    fn p2_equivalence_is_exact() {
        let p = ParameterPair::new(0.0, 0.0).unwrap();
        let r = equivalence_experiment(&p, 2.0, 0.7, 2, &small()).unwrap();
        let c = l2_constant(1.3);
        for x in &r.ratios {
            assert_relative_eq!(*x, c, max_relative = 1e-8);
        }
    }

    #[test]
    fn p2_gfunction_is_exact_singular() {
        let p = ParameterPair::chebyshev();
        let r = gfunction_norm_experiment(&p, 2.0, 0.5, &small()).unwrap();
        for x in &r.ratios {
            assert_relative_eq!(*x, 1.0, max_relative = 1e-8);
        }
    }

    #[test]
    fn properness_trend() {
        let p = ParameterPair::new(0.0, 0.0).unwrap();
        let space = PotentialSpace::standard(p, 2.0, 1.0).unwrap();
        let r10 = single_mode_inclusion_ratio(&space, 0.0, 10).unwrap();
        let r40 = single_mode_inclusion_ratio(&space, 0.0, 40).unwrap();
        assert!(r40 < r10);
        assert_relative_eq!(r40, p.eigenvalue(40).powf(-0.5), max_relative = 1e-10);
    }

    #[test]
    fn norms_exploratory_off_two() {
        let p = ParameterPair::new(0.0, 0.0).unwrap();
        let r2 = norms_experiment(&p, 2.0, &[0.0, 1.0], &small()).unwrap();
        assert_eq!(r2.pass, Some(true));
        let r3 = norms_experiment(&p, 3.0, &[0.0, 1.0], &small()).unwrap();
        assert_eq!(r3.pass, None);
        assert_eq!(r3.tables[0].rows.len(), 24);
    }
}
