//! The polynomial setting: `((0, pi), d mu, |.|)` as a space of homogeneous
//! type, the Jacobi-Poisson kernel, the vertical kernel of the fractional
//! square function and grid audits of its standard estimates.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;
use std::f64::consts::PI;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::expansion::Expansion;
use crate::fractional::{caputo_order, sign};
use crate::jacobi::{mu_density, mu_mass, psi_unchecked, Recurrence};
use crate::params::ParameterPair;
use crate::quadrature::{Measure, QuadratureRule};
use crate::report::{Check, ExperimentReport, Stats, Table};
use crate::timequad::TimeQuadrature;

/// Default lower cut for kernel times.
pub const DEFAULT_T_FLOOR: f64 = 1e-4;
/// Relative size of the discarded series tail.
const SERIES_TOL: f64 = 1e-14;

/// `((0, pi), d mu_{alpha,beta}, |.|)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomogeneousSpace {
    params: ParameterPair,
}

impl HomogeneousSpace {
    pub fn new(params: ParameterPair) -> Self {
        Self { params }
    }

    pub fn params(&self) -> &ParameterPair {
        &self.params
    }

    pub fn density(&self, theta: f64) -> f64 {
        mu_density(theta, &self.params)
    }

    pub fn total_mass(&self) -> f64 {
        mu_mass(&self.params)
    }

    /// `mu([0, theta])`: with `x = sin^2(theta/2)`, `d mu = x^alpha (1-x)^beta dx`.
    fn cdf(&self, theta: f64) -> f64 {
        let x = (0.5 * theta).sin().powi(2);
        beta_reg(self.params.alpha() + 1.0, self.params.beta() + 1.0, x)
    }

    /// `mu([theta, pi])`, computed without cancellation near `pi`.
    fn ccdf(&self, theta: f64) -> f64 {
        let y = (0.5 * theta).cos().powi(2);
        beta_reg(self.params.beta() + 1.0, self.params.alpha() + 1.0, y)
    }

    /// `mu([a, b])` for `0 <= a <= b <= pi`, as a multiple of the total mass.
    fn interval_fraction(&self, a: f64, b: f64) -> f64 {
        let mid = 0.5 * PI;
        if b <= mid {
            self.cdf(b) - self.cdf(a)
        } else if a >= mid {
            self.ccdf(a) - self.ccdf(b)
        } else {
            (1.0 - self.cdf(a)) - self.ccdf(b)
        }
    }

    /// `mu(B(theta, r) cap (0, pi))`.
    pub fn ball_measure(&self, theta: f64, r: f64) -> Result<f64> {
        if !(theta > 0.0 && theta < PI) {
            return Err(Error::ThetaOutOfRange(theta));
        }
        if !(r > 0.0) {
            return Err(Error::InvalidArgument(format!("radius must be > 0, got {r}")));
        }
        let a = (theta - r).max(0.0);
        let b = (theta + r).min(PI);
        Ok(self.total_mass() * self.interval_fraction(a, b))
    }

    /// `mu(B(theta, |theta - phi|))` over its comparable closed form
    /// `|theta - phi| (theta + phi)^{2alpha+1} (2pi - theta - phi)^{2beta+1}`.
    pub fn comparability_ratio(&self, theta: f64, phi: f64) -> Result<f64> {
        let d = (theta - phi).abs();
        let model = d
            * (theta + phi).powf(2.0 * self.params.alpha() + 1.0)
            * (2.0 * PI - theta - phi).powf(2.0 * self.params.beta() + 1.0);
        Ok(self.ball_measure(theta, d)? / model)
    }
}

/// `q(theta, phi, u, v) = 1 - u sin(theta/2) sin(phi/2) - v cos(theta/2) cos(phi/2)`.
pub fn q_form(theta: f64, phi: f64, u: f64, v: f64) -> f64 {
    let (s1, c1) = (0.5 * theta).sin_cos();
    let (s2, c2) = (0.5 * phi).sin_cos();
    1.0 - u * s1 * s2 - v * c1 * c2
}

/// `c` in `q(theta, phi, 1, 1) = 2 sin^2((theta - phi)/4) >= c |theta - phi|^2`.
pub const Q_FORM_LOWER: f64 = 1.0 / (2.0 * PI * PI);

/// Exponent `kappa` in `|\mathcal P_n| <~ (n + 1)^kappa`.
fn growth_kappa(params: &ParameterPair) -> f64 {
    (params.alpha() + params.beta() + 2.0).max(0.0)
}

/// Bound for the sum of terms `n, n+1, ...` of a series whose terms are at
/// most `(k + 1)^power e^{-t r_k}`.
fn tail_bound(params: &ParameterPair, n: usize, t: f64, power: f64) -> f64 {
    let r = (n as f64 + params.a()).abs();
    (n as f64 + 1.0).powf(power) * (-t * r).exp() / (1.0 - (-t).exp())
}

/// First `n` with a tail bound below `tol`; `None` past `cap`.
fn truncation_index(params: &ParameterPair, t: f64, power: f64, tol: f64, cap: usize) -> Option<usize> {
    // The bound is eventually decreasing; step geometrically, then bisect.
    let f = |n: usize| tail_bound(params, n, t, power) <= tol;
    let peak = (power / t).ceil() as usize;
    let mut hi = peak.max(1);
    while !f(hi) {
        hi = hi.checked_mul(2)?;
        if hi > cap {
            return None;
        }
    }
    let mut lo = peak.min(hi);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if f(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Some(hi)
}

/// Largest series length any kernel routine will allocate.
pub const SERIES_CAP: usize = 4_000_000;

/// `\mathcal H_t(theta, phi) = sum e^{-t sqrt(lambda_n)} \mathcal P_n(theta) \mathcal P_n(phi)`,
/// summed until the growth-based tail bound drops below `1e-14` of the
/// absolute partial sum.
pub fn poisson_kernel_poly(space: &HomogeneousSpace, t: f64, theta: f64, phi: f64, t_floor: f64) -> Result<f64> {
    if !(t >= t_floor) || !(t_floor > 0.0) {
        return Err(Error::InvalidArgument(format!("kernel time {t} is below the floor {t_floor}")));
    }
    for x in [theta, phi] {
        if !(x > 0.0 && x < PI) {
            return Err(Error::ThetaOutOfRange(x));
        }
    }
    let p = space.params;
    let power = 2.0 * growth_kappa(&p);
    let cap = truncation_index(&p, t, power, 1e-300_f64.max(SERIES_TOL * 1e-6), SERIES_CAP)
        .ok_or_else(|| Error::UnderResolved(format!("kernel series at t={t} exceeds {SERIES_CAP} terms")))?;
    let rec = Recurrence::new(&p, cap + 1);
    let a = rec.eval(theta.cos(), cap + 1);
    let b = rec.eval(phi.cos(), cap + 1);
    let (mut sum, mut abs) = (0.0, 0.0);
    for n in 0..=cap {
        let term = (-t * p.sqrt_eigenvalue(n)).exp() * (a[n] * b[n]);
        sum += term;
        abs += term.abs();
        if n % 16 == 15 && tail_bound(&p, n + 1, t, power) <= SERIES_TOL * abs {
            break;
        }
    }
    Ok(sum)
}

/// Series data for the vertical kernel
/// `{ d_t^gamma \mathcal H_t(theta, phi) }_{t > 0}` in `L^2(t^{2gamma-1} dt)`.
pub struct VerticalKernel {
    params: ParameterPair,
    gamma: f64,
    tq: TimeQuadrature,
    rec: Recurrence,
    rec_shift: Recurrence,
    /// `r_n^gamma`, `r_n = sqrt(lambda_n)`.
    rpow: Vec<f64>,
    /// Per time node: series length needed for values, and for gradients.
    lens: Vec<usize>,
    grad_lens: Vec<usize>,
}

/// Norms at one point pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelNorms {
    pub value: f64,
    pub d_theta: f64,
    pub d_phi: f64,
}

impl VerticalKernel {
    /// Kernel on `[t_floor, infinity)` with the floored time rule.
    pub fn new(params: ParameterPair, gamma: f64, t_floor: f64) -> Result<Self> {
        if !(gamma > 0.0) {
            return Err(Error::InvalidArgument(format!("gamma must be > 0, got {gamma}")));
        }
        let rate_min = if params.is_singular() { params.sqrt_eigenvalue(1) } else { params.sqrt_eigenvalue(0) };
        let tq = TimeQuadrature::with_floor(gamma, rate_min, t_floor)?;
        Self::with_quadrature(params, gamma, tq, None)
    }

    /// Kernel with an explicit time rule. The series is cut after `modes`
    /// terms when given, and otherwise by the tail bound at each node.
    pub fn with_quadrature(params: ParameterPair, gamma: f64, tq: TimeQuadrature, modes: Option<usize>) -> Result<Self> {
        let kappa = growth_kappa(&params);
        let power = gamma + 2.0 * kappa;
        let grad_power = power + 1.0;
        // Absolute floor relative to a unit-size kernel; the relative test
        // inside the sums usually stops much earlier.
        let abs_tol = SERIES_TOL * 1e-3;
        let mut lens = Vec::with_capacity(tq.len());
        let mut grad_lens = Vec::with_capacity(tq.len());
        for &t in tq.nodes() {
            if let Some(m) = modes {
                lens.push(m.max(1));
                grad_lens.push(m.max(1));
                continue;
            }
            let n = truncation_index(&params, t, power, abs_tol, SERIES_CAP);
            let g = truncation_index(&params, t, grad_power, abs_tol, SERIES_CAP);
            match (n, g) {
                (Some(n), Some(g)) => {
                    lens.push(n + 1);
                    grad_lens.push(g + 1);
                }
                _ => {
                    return Err(Error::UnderResolved(format!(
                        "vertical kernel at t={t} needs more than {SERIES_CAP} terms; raise the time floor"
                    )))
                }
            }
        }
        let cap = grad_lens.iter().chain(&lens).copied().max().unwrap_or(1);
        let rpow = (0..cap).map(|n| params.sqrt_eigenvalue(n).powf(gamma)).collect();
        Ok(Self {
            params,
            gamma,
            rec: Recurrence::new(&params, cap),
            rec_shift: Recurrence::new(&params.shifted(1), cap),
            rpow,
            lens,
            grad_lens,
            tq,
        })
    }

    pub fn params(&self) -> &ParameterPair {
        &self.params
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn time_quadrature(&self) -> &TimeQuadrature {
        &self.tq
    }

    /// Longest series used.
    pub fn series_len(&self) -> usize {
        self.rpow.len()
    }

    fn check_pair(theta: f64, phi: f64) -> Result<()> {
        for x in [theta, phi] {
            if !(x > 0.0 && x < PI) {
                return Err(Error::ThetaOutOfRange(x));
            }
        }
        if theta == phi {
            return Err(Error::InvalidArgument(format!("kernel is singular on the diagonal (theta = phi = {theta})")));
        }
        Ok(())
    }

    /// `L^2(t^{2gamma-1} dt)` norm of `t -> sum_n r_n^gamma e^{-t r_n} c_n`.
    fn vertical_norm(&self, c: &[f64], lens: &[usize], power: f64) -> f64 {
        let p = &self.params;
        let a = p.a();
        let mut total = 0.0;
        for ((&t, &w), &len) in self.tq.nodes().iter().zip(self.tq.weights()).zip(lens) {
            let len = len.min(c.len());
            // e^{-t r_n} = e^{-t a} z^n for n >= 1; r_0 = |a|.
            let z = (-t).exp();
            let mut zn = z * (-t * a).exp();
            let mut sum = self.rpow[0] * (-t * a.abs()).exp() * c[0];
            let mut abs = sum.abs();
            let mut n = 1;
            while n < len {
                let term = self.rpow[n] * zn * c[n];
                sum += term;
                abs += term.abs();
                zn *= z;
                n += 1;
                if n % 64 == 0 && tail_bound(p, n, t, power) <= SERIES_TOL * abs {
                    break;
                }
            }
            total += w * sum * sum;
        }
        total.sqrt()
    }

    fn polys(&self, theta: f64, len: usize) -> Vec<f64> {
        self.rec.eval(theta.cos(), len)
    }

    fn poly_derivatives(&self, theta: f64, len: usize) -> Vec<f64> {
        let mut out = vec![0.0; len];
        if len < 2 {
            return out;
        }
        let sh = self.rec_shift.eval(theta.cos(), len - 1);
        let sc = 0.5 * theta.sin();
        for n in 1..len {
            out[n] = -self.params.eigenvalue_gap(n).sqrt() * sc * sh[n - 1];
        }
        out
    }

    /// `|| G^gamma(theta, phi) ||_B`.
    pub fn norm(&self, theta: f64, phi: f64) -> Result<f64> {
        Self::check_pair(theta, phi)?;
        let len = self.lens.iter().copied().max().unwrap_or(1);
        let a = self.polys(theta, len);
        let b = self.polys(phi, len);
        let c: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        let power = self.gamma + 2.0 * growth_kappa(&self.params);
        Ok(self.vertical_norm(&c, &self.lens, power))
    }

    /// Norms of `d_theta K` and `d_phi K`.
    pub fn gradient_norms(&self, theta: f64, phi: f64) -> Result<(f64, f64)> {
        Self::check_pair(theta, phi)?;
        let len = self.grad_lens.iter().copied().max().unwrap_or(1);
        let (pa, pb) = (self.polys(theta, len), self.polys(phi, len));
        let (da, db) = (self.poly_derivatives(theta, len), self.poly_derivatives(phi, len));
        let power = self.gamma + 2.0 * growth_kappa(&self.params) + 1.0;
        let ct: Vec<f64> = da.iter().zip(&pb).map(|(x, y)| x * y).collect();
        let cp: Vec<f64> = pa.iter().zip(&db).map(|(x, y)| x * y).collect();
        Ok((
            self.vertical_norm(&ct, &self.grad_lens, power),
            self.vertical_norm(&cp, &self.grad_lens, power),
        ))
    }

    /// Value norm plus the norms of both partial derivatives.
    pub fn norms_with_gradient(&self, theta: f64, phi: f64) -> Result<KernelNorms> {
        let value = self.norm(theta, phi)?;
        let (d_theta, d_phi) = self.gradient_norms(theta, phi)?;
        Ok(KernelNorms { value, d_theta, d_phi })
    }
}

pub fn frac_kernel_vertical_norm(space: &HomogeneousSpace, gamma: f64, theta: f64, phi: f64, t_floor: f64) -> Result<f64> {
    VerticalKernel::new(space.params, gamma, t_floor)?.norm(theta, phi)
}

/// Expansion `F = sum b_n \mathcal P_n` in the polynomial system, with
/// `b_n = <F, \mathcal P_n>_{d mu}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyExpansion {
    params: ParameterPair,
    coeffs: Vec<Complex64>,
}

impl PolyExpansion {
    pub fn new(params: ParameterPair, coeffs: Vec<Complex64>) -> Result<Self> {
        if let Some(i) = coeffs.iter().position(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { params, coeffs })
    }

    /// `Psi^{-alpha-1,-beta-1} f` for `f = sum a_n phi_n`: the coefficients carry over.
    pub fn from_function_system(e: &Expansion) -> Self {
        Self {
            params: *e.params(),
            coeffs: e.coeffs().to_vec(),
        }
    }

    /// Coefficients of `f` by Gauss-Jacobi quadrature in `d mu`.
    pub fn from_fn(f: impl Fn(f64) -> Complex64, params: ParameterPair, len: usize, nodes: usize) -> Result<Self> {
        if nodes < len {
            return Err(Error::ResolutionMismatch { nodes, modes: len });
        }
        let rule = QuadratureRule::gauss_jacobi(nodes, &params, Measure::Jacobi)?;
        let rec = Recurrence::new(&params, len.max(1));
        let mut coeffs = vec![Complex64::new(0.0, 0.0); len];
        let mut vals = vec![0.0; len];
        for (&t, &w) in rule.nodes().iter().zip(rule.mu_weights()) {
            rec.eval_into(t.cos(), &mut vals);
            let fv = f(t);
            for (c, &v) in coeffs.iter_mut().zip(&vals) {
                *c += fv * (w * v);
            }
        }
        Self::new(params, coeffs)
    }

    pub fn params(&self) -> &ParameterPair {
        &self.params
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn evaluate(&self, theta: f64) -> Result<Complex64> {
        if !(theta > 0.0 && theta < PI) {
            return Err(Error::ThetaOutOfRange(theta));
        }
        let v = Recurrence::new(&self.params, self.coeffs.len().max(1)).eval(theta.cos(), self.coeffs.len());
        Ok(self.coeffs.iter().zip(&v).map(|(c, &x)| c * x).sum())
    }
}

/// `g^gamma(F)(theta) = || d_t^gamma \mathcal H_t F(theta) ||_{L^2(t^{2gamma-1} dt)}`.
pub fn g_vertical_poly(e: &PolyExpansion, gamma: f64, theta: f64, tq: &TimeQuadrature) -> Result<f64> {
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::ThetaOutOfRange(theta));
    }
    if (tq.rho() - gamma).abs() > 1e-15 * gamma.max(1.0) {
        return Err(Error::InvalidArgument(format!("time rule has rho={} but gamma={gamma}", tq.rho())));
    }
    let p = e.params;
    let len = e.coeffs.len();
    let vals = Recurrence::new(&p, len.max(1)).eval(theta.cos(), len);
    let s = sign(caputo_order(gamma));
    let terms: Vec<(f64, Complex64)> = e
        .coeffs
        .iter()
        .zip(&vals)
        .enumerate()
        .map(|(n, (c, &v))| {
            let r = p.sqrt_eigenvalue(n);
            (r, c * (s * r.powf(gamma) * v))
        })
        .filter(|(_, c)| c.re != 0.0 || c.im != 0.0)
        .collect();
    let total = tq.integrate(|t| {
        terms
            .iter()
            .map(|&(r, c)| c * (-t * r).exp())
            .sum::<Complex64>()
            .norm_sqr()
    });
    Ok(total.sqrt())
}

/// Largest relative mismatch of `g^gamma_fn(f) = Psi g^gamma(Psi^{-alpha-1,-beta-1} f)`
/// over the given points.
pub fn conjugation_defect(e: &Expansion, gamma: f64, thetas: &[f64]) -> Result<f64> {
    let kind = crate::fractional::SquareFunction::Fractional { gamma };
    let Some(tq) = kind.time_quadrature(e.params(), e.len())? else {
        return Ok(0.0);
    };
    let lhs = kind.evaluate(e, thetas, &tq, Execution::Sequential)?;
    let poly = PolyExpansion::from_function_system(e);
    let mut worst: f64 = 0.0;
    for (&t, &l) in thetas.iter().zip(&lhs) {
        let r = psi_unchecked(t, e.params()) * g_vertical_poly(&poly, gamma, t, &tq)?;
        worst = worst.max((l - r).abs() / l.abs().max(f64::MIN_POSITIVE));
    }
    Ok(worst)
}

/// Which standard estimate an audit probes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditKind {
    /// `||K|| mu(B(theta, |theta - phi|))`.
    Growth,
    /// `(||d_theta K|| + ||d_phi K||) |theta - phi| mu(B(theta, |theta - phi|))`.
    Gradient,
}

/// Point grid for the kernel audits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditGrid {
    /// Points per axis at the base resolution.
    pub points: usize,
    /// Distance kept from the endpoints `0` and `pi`.
    pub margin: f64,
    /// Smallest `|theta - phi|` audited.
    pub d_min: f64,
    /// Optional largest `|theta - phi|`, for near-diagonal band runs.
    pub d_max: Option<f64>,
    pub t_floor: f64,
}

impl Default for AuditGrid {
    fn default() -> Self {
        Self {
            points: 20,
            margin: 0.05,
            d_min: 0.02,
            d_max: None,
            t_floor: 1e-3,
        }
    }
}

impl AuditGrid {
    fn validate(&self) -> Result<()> {
        if self.points < 2 || !(self.margin > 0.0 && self.margin < 0.5 * PI) || !(self.d_min > 0.0) || !(self.t_floor > 0.0) {
            return Err(Error::InvalidArgument(format!("invalid audit grid {self:?}")));
        }
        if let Some(d) = self.d_max {
            if !(d > self.d_min) {
                return Err(Error::InvalidArgument(format!("band [{}, {d}] is empty", self.d_min)));
            }
        }
        Ok(())
    }

    /// Audited pairs at `points` per axis.
    pub fn pairs(&self, points: usize) -> Vec<(f64, f64)> {
        let h = (PI - 2.0 * self.margin) / (points - 1) as f64;
        let xs: Vec<f64> = (0..points).map(|i| self.margin + i as f64 * h).collect();
        let mut out = Vec::new();
        match self.d_max {
            None => {
                for &x in &xs {
                    for &y in &xs {
                        if (x - y).abs() >= self.d_min {
                            out.push((x, y));
                        }
                    }
                }
            }
            Some(d_max) => {
                // Log-spaced offsets in the band on both sides of each point.
                let k = points.max(2);
                let ratio = (d_max / self.d_min).ln() / (k - 1) as f64;
                for &x in &xs {
                    for j in 0..k {
                        let d = self.d_min * (ratio * j as f64).exp();
                        for y in [x - d, x + d] {
                            if y > 0.0 && y < PI {
                                out.push((x, y));
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

fn audit_products(kernel: &VerticalKernel, space: &HomogeneousSpace, kind: AuditKind, pairs: &[(f64, f64)], exec: Execution) -> Result<Vec<f64>> {
    exec.try_map_indices(pairs.len(), |i| {
        let (x, y) = pairs[i];
        let d = (x - y).abs();
        let ball = space.ball_measure(x, d)?;
        Ok(match kind {
            AuditKind::Growth => kernel.norm(x, y)? * ball,
            AuditKind::Gradient => {
                let (dt, dp) = kernel.gradient_norms(x, y)?;
                (dt + dp) * d * ball
            }
        })
    })
}

/// Grid audit of the growth or gradient estimate: the supremum of the
/// product must be finite and move by less than 10% when the grid doubles.
pub fn cz_audit(params: ParameterPair, gamma: f64, kind: AuditKind, grid: &AuditGrid, exec: Execution) -> Result<ExperimentReport> {
    grid.validate()?;
    let start = Instant::now();
    let space = HomogeneousSpace::new(params);
    let kernel = VerticalKernel::new(params, gamma, grid.t_floor)?;
    let base_pairs = grid.pairs(grid.points);
    let fine_pairs = grid.pairs(2 * grid.points);
    let base = audit_products(&kernel, &space, kind, &base_pairs, exec)?;
    let fine = audit_products(&kernel, &space, kind, &fine_pairs, exec)?;

    let name = match kind {
        AuditKind::Growth => "kernel_growth",
        AuditKind::Gradient => "kernel_gradient",
    };
    let mut report = ExperimentReport::new(name);
    report.params = Some(params);
    report.s_or_gamma = Some(gamma);
    report.samples = base.len();
    report
        .setting("grid", grid)
        .setting("refined_points", 2 * grid.points)
        .setting("series_len", kernel.series_len())
        .setting("time_nodes", kernel.time_quadrature().len());
    let finite = base.iter().chain(&fine).all(|v| v.is_finite());
    let sup = base.iter().copied().fold(0.0, f64::max);
    let sup_fine = fine.iter().copied().fold(0.0, f64::max);
    let drift = (sup_fine - sup).abs() / sup.max(f64::MIN_POSITIVE);
    report.checks.push(Check {
        name: "all_products_finite".into(),
        value: if finite { 1.0 } else { 0.0 },
        threshold: 1.0,
        pass: finite,
    });
    report.checks.push(Check::at_most("sup_product", sup, f64::MAX));
    report.checks.push(Check::at_most("sup_product_refined", sup_fine, f64::MAX));
    report.checks.push(Check::below("sup_drift_doubled_grid", drift, 0.1));
    report.stats = Stats::from_values(&base);
    let mut table = Table::new("heatmap", &["theta", "phi", "product"]);
    for (&(x, y), &v) in base_pairs.iter().zip(&base) {
        table.push(vec![x, y, v]);
    }
    report.tables.push(table);
    report.ratios = base;
    report.finish_from_checks();
    report.runtime_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

pub fn cz_growth_audit(params: ParameterPair, gamma: f64, grid: &AuditGrid, exec: Execution) -> Result<ExperimentReport> {
    cz_audit(params, gamma, AuditKind::Growth, grid, exec)
}

pub fn cz_gradient_audit(params: ParameterPair, gamma: f64, grid: &AuditGrid, exec: Execution) -> Result<ExperimentReport> {
    cz_audit(params, gamma, AuditKind::Gradient, grid, exec)
}

/// One pair in each sign regime of `(alpha + 1/2, beta + 1/2)`.
pub fn audit_regimes() -> [ParameterPair; 4] {
    [
        ParameterPair::new(0.0, 0.0).expect("valid"),
        ParameterPair::new(-0.75, 0.0).expect("valid"),
        ParameterPair::new(0.0, -0.75).expect("valid"),
        ParameterPair::new(-0.75, -0.6).expect("valid"),
    ]
}

/// Smallest and largest [`HomogeneousSpace::comparability_ratio`] over a grid.
pub fn comparability_range(space: &HomogeneousSpace, points: usize, margin: f64) -> Result<(f64, f64)> {
    let grid = AuditGrid {
        points,
        margin,
        d_min: 1e-12,
        ..Default::default()
    };
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for (x, y) in grid.pairs(points) {
        let r = space.comparability_ratio(x, y)?;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::{integrate, Tolerance};
    use approx::assert_relative_eq;
    use statrs::function::gamma::gamma as gamma_fn;

    #[test]
    fn ball_measure_matches_quadrature() {
        let sp = HomogeneousSpace::new(ParameterPair::new(-0.75, 0.3).unwrap());
        for &(t, r) in &[(0.3f64, 0.2f64), (1.4, 0.5), (2.9, 0.4), (1.0, 3.0)] {
            let a = (t - r).max(0.0);
            let b = (t + r).min(PI);
            // Integrate in x = sin^2(theta/2) to remove the endpoint singularity.
            let (xa, xb) = ((0.5 * a).sin().powi(2), (0.5 * b).sin().powi(2));
            let (al, be) = (sp.params().alpha(), sp.params().beta());
            let tol = Tolerance { abs: 1e-15, rel: 1e-12, max_intervals: 4000 };
            let oracle = integrate(|v: f64| {
                let x = xa + (xb - xa) * v.powi(4);
                4.0 * v.powi(3) * (xb - xa) * x.powf(al) * (1.0 - x).powf(be)
            }, 0.0, 1.0, tol);
            assert_relative_eq!(sp.ball_measure(t, r).unwrap(), oracle.value, max_relative = 1e-9);
        }
        assert_relative_eq!(sp.ball_measure(1.0, 4.0).unwrap(), sp.total_mass(), max_relative = 1e-14);
        let cheb = HomogeneousSpace::new(ParameterPair::chebyshev());
        assert_relative_eq!(cheb.ball_measure(1.0, 0.25).unwrap(), 0.5, max_relative = 1e-12);
    }

    #[test]
    fn q_form_bounds() {
        for i in 1..30 {
            for j in 1..30 {
                let (x, y) = (i as f64 * PI / 30.0, j as f64 * PI / 30.0);
                let q = q_form(x, y, 1.0, 1.0);
                assert!((0.0..=2.0).contains(&q) || q.abs() < 1e-15);
                assert!(q >= Q_FORM_LOWER * (x - y).powi(2) - 1e-15);
                let q0 = q_form(x, y, -1.0, -1.0);
                assert!(q0 <= 2.0 + 1e-15);
            }
        }
    }

    #[test]
    fn chebyshev_poisson_kernel_closed_form() {
        let sp = HomogeneousSpace::new(ParameterPair::chebyshev());
        let t = 0.05;
        let r = (-t as f64).exp();
        let pk = |x: f64| (1.0 - r * r) / (1.0 - 2.0 * r * x.cos() + r * r);
        for &(x, y) in &[(0.4, 1.9), (2.0, 2.3), (0.1, 3.0)] {
            let expect = (pk(x - y) + pk(x + y)) / (2.0 * PI);
            let got = poisson_kernel_poly(&sp, t, x, y, DEFAULT_T_FLOOR).unwrap();
            assert_relative_eq!(got, expect, max_relative = 1e-11);
            assert_eq!(got, poisson_kernel_poly(&sp, t, y, x, DEFAULT_T_FLOOR).unwrap());
        }
        assert!(poisson_kernel_poly(&sp, 1e-5, 0.4, 1.0, DEFAULT_T_FLOOR).is_err());
    }

    #[test]
    fn kernel_integrates_against_constant() {
        let p = ParameterPair::new(0.4, -0.3).unwrap();
        let sp = HomogeneousSpace::new(p);
        let t = 0.5;
        let rule = QuadratureRule::gauss_jacobi(120, &p, Measure::Jacobi).unwrap();
        let v: f64 = rule
            .nodes()
            .iter()
            .zip(rule.mu_weights())
            .map(|(&y, &w)| w * poisson_kernel_poly(&sp, t, 1.1, y, DEFAULT_T_FLOOR).unwrap())
            .sum();
        assert_relative_eq!(v, (-t * p.sqrt_eigenvalue(0)).exp(), max_relative = 1e-12);
    }

    #[test]
    fn single_mode_vertical_norm() {
        let p = ParameterPair::new(0.2, 0.5).unwrap();
        let gamma = 0.8;
        let r0 = p.sqrt_eigenvalue(0);
        let tq = TimeQuadrature::new(gamma, r0, r0).unwrap();
        let k = VerticalKernel::with_quadrature(p, gamma, tq, Some(1)).unwrap();
        let (x, y) = (0.7, 2.1);
        let c0 = crate::jacobi::normalization_constant(0, &p);
        let expect = r0.powf(gamma) * c0 * c0 * (gamma_fn(2.0 * gamma)).sqrt() / (2.0 * r0).powf(gamma);
        assert_relative_eq!(k.norm(x, y).unwrap(), expect, max_relative = 1e-10);
    }

    #[test]
    fn vertical_kernel_symmetry_and_blowup() {
        let p = ParameterPair::new(-0.75, 0.0).unwrap();
        let k = VerticalKernel::new(p, 0.5, 1e-3).unwrap();
        let a = k.norm(0.8, 1.6).unwrap();
        let b = k.norm(1.6, 0.8).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-12);
        let near: Vec<f64> = [0.4, 0.2, 0.1, 0.05].iter().map(|d| k.norm(1.2, 1.2 + d).unwrap()).collect();
        assert!(near.windows(2).all(|w| w[1] > w[0]));
        assert!(k.norm(1.0, 1.0).is_err());
    }

    #[test]
    fn derivative_polynomials_match_finite_differences() {
        let p = ParameterPair::new(0.0, 0.0).unwrap();
        let k = VerticalKernel::new(p, 1.5, 1e-2).unwrap();
        let h = 1e-6;
        let d = k.poly_derivatives(1.3, 12);
        let plus = k.polys(1.3 + h, 12);
        let minus = k.polys(1.3 - h, 12);
        for n in 0..12 {
            assert_relative_eq!(d[n], (plus[n] - minus[n]) / (2.0 * h), epsilon = 1e-6);
        }
    }

    #[test]
    fn conjugation_identity() {
        let p = ParameterPair::new(0.3, -0.4).unwrap();
        let e = crate::ExpansionSampler::default().sample(&p, 5, 0);
        let thetas: Vec<f64> = (1..10).map(|i| i as f64 * PI / 10.0).collect();
        assert!(conjugation_defect(&e, 0.7, &thetas).unwrap() < 1e-8);
    }

    #[test]
    fn poly_expansion_roundtrip() {
        let p = ParameterPair::new(0.0, 0.0).unwrap();
        let f = |t: f64| Complex64::new(t.cos().powi(3), 0.0);
        let e = PolyExpansion::from_fn(f, p, 6, 12).unwrap();
        assert_relative_eq!(e.evaluate(0.9).unwrap().re, f(0.9).re, epsilon = 1e-13);
        assert!(e.coeffs()[4].norm() < 1e-14);
    }
}
