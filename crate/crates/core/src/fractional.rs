//! Caputo derivatives of Poisson integrals and the vertical square
//! functions built from them.
//!
//! For `f = sum a_n phi_n` the Caputo derivative of order `gamma` of
//! `t -> e^{-t sqrt(L)} f` is again a finite exponential sum,
//! `(-1)^m sum lambda_n^{gamma/2} e^{-t sqrt(lambda_n)} a_n phi_n` with
//! `m = floor(gamma) + 1`, so every square function here reduces to
//! `(int_0^infty t^{2 rho - 1} |sum_n h_n e^{-t r_n} a_n phi_n(theta)|^2 dt)^{1/2}`
//! for suitable amplitudes `h_n`, rates `r_n` and exponent `rho`.

use num_complex::Complex64;
use statrs::function::gamma::gamma as gamma_fn;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::expansion::Expansion;
use crate::integrate::{integrate, Tolerance};
use crate::jacobi::{phi_all, PhiEvaluator};
use crate::params::ParameterPair;
use crate::quadrature::{Measure, QuadratureRule};
use crate::timequad::TimeQuadrature;

/// `m = floor(gamma) + 1`.
pub fn caputo_order(gamma: f64) -> u32 {
    gamma.floor() as u32 + 1
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("fractional order must be > 0, got {gamma}")))
    }
}

pub(crate) fn sign(m: u32) -> f64 {
    if m % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// The four vertical square functions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SquareFunction {
    /// Caputo derivative of order `gamma` of the Poisson semigroup.
    Fractional { gamma: f64 },
    /// `k`-th time derivative weighted by `t^{k - gamma}`, `k > gamma`.
    Higher { gamma: f64, k: u32 },
    /// As `Fractional`, for the shifted semigroup `e^{-t} e^{-t sqrt(L)}`.
    ModifiedFractional { gamma: f64 },
    /// As `Higher`, for the shifted semigroup.
    ModifiedHigher { gamma: f64, k: u32 },
}

impl SquareFunction {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SquareFunction::Fractional { gamma } | SquareFunction::ModifiedFractional { gamma } => {
                check_gamma(gamma)
            }
            SquareFunction::Higher { gamma, k } | SquareFunction::ModifiedHigher { gamma, k } => {
                check_gamma(gamma)?;
                if (k as f64) <= gamma {
                    return Err(Error::InvalidArgument(format!(
                        "integer order k={k} must exceed gamma={gamma}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Exponent `rho` of the weight `t^{2 rho - 1}`.
    pub fn rho(&self) -> f64 {
        match *self {
            SquareFunction::Fractional { gamma } | SquareFunction::ModifiedFractional { gamma } => gamma,
            SquareFunction::Higher { gamma, k } | SquareFunction::ModifiedHigher { gamma, k } => {
                k as f64 - gamma
            }
        }
    }

    pub fn is_modified(&self) -> bool {
        matches!(
            self,
            SquareFunction::ModifiedFractional { .. } | SquareFunction::ModifiedHigher { .. }
        )
    }

    /// Exponential rate of mode `n`.
    pub fn rate(&self, params: &ParameterPair, n: usize) -> f64 {
        let r = params.sqrt_eigenvalue(n);
        if self.is_modified() {
            1.0 + r
        } else {
            r
        }
    }

    /// Amplitude `h_n` multiplying `e^{-t r_n} a_n phi_n`.
    pub fn amplitude(&self, params: &ParameterPair, n: usize) -> f64 {
        let r = self.rate(params, n);
        match *self {
            SquareFunction::Fractional { gamma } | SquareFunction::ModifiedFractional { gamma } => {
                sign(caputo_order(gamma)) * r.powf(gamma)
            }
            SquareFunction::Higher { k, .. } | SquareFunction::ModifiedHigher { k, .. } => {
                (-r).powi(k as i32)
            }
        }
    }

    /// Time rule adapted to the modes `0..len` of `params`, or `None` when
    /// every amplitude vanishes.
    pub fn time_quadrature(&self, params: &ParameterPair, len: usize) -> Result<Option<TimeQuadrature>> {
        self.validate()?;
        let rates: Vec<f64> = (0..len)
            .filter(|&n| self.amplitude(params, n) != 0.0)
            .map(|n| self.rate(params, n))
            .collect();
        if rates.is_empty() {
            return Ok(None);
        }
        let lo = rates.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = rates.iter().copied().fold(0.0, f64::max);
        TimeQuadrature::new(self.rho(), lo, hi).map(Some)
    }

    fn kernel(&self, e: &Expansion) -> VerticalSum {
        let p = e.params();
        let mut s = VerticalSum {
            cols: Vec::new(),
            amps: Vec::new(),
            rates: Vec::new(),
        };
        for (n, a) in e.coeffs().iter().enumerate() {
            let h = self.amplitude(p, n);
            if h != 0.0 && (a.re != 0.0 || a.im != 0.0) {
                s.cols.push(n);
                s.amps.push(a * h);
                s.rates.push(self.rate(p, n));
            }
        }
        s
    }

    /// Values at each `theta` in `(0, pi)`.
    pub fn evaluate(
        &self,
        e: &Expansion,
        thetas: &[f64],
        tq: &TimeQuadrature,
        exec: Execution,
    ) -> Result<Vec<f64>> {
        for &t in thetas {
            if !(t > 0.0 && t < std::f64::consts::PI) {
                return Err(Error::ThetaOutOfRange(t));
            }
        }
        let basis = PhiEvaluator::new(e.params(), e.len()).phi_matrix(thetas, e.len());
        self.evaluate_on_basis(e, &basis, tq, exec)
    }

    /// Values for a precomputed row-major basis matrix
    /// (`rows x e.len()`), e.g. `phi_n` or `\mathcal P_n` at grid nodes.
    pub fn evaluate_on_basis(
        &self,
        e: &Expansion,
        basis: &[f64],
        tq: &TimeQuadrature,
        exec: Execution,
    ) -> Result<Vec<f64>> {
        self.validate()?;
        let ncols = e.len();
        let rows = if ncols == 0 { 0 } else { basis.len() / ncols };
        let sum = self.kernel(e);
        if sum.cols.is_empty() {
            return Ok(vec![0.0; rows]);
        }
        sum.check(self.rho(), tq)?;
        let table = sum.table(tq);
        Ok(sum.norms(&table, tq, basis, ncols, exec))
    }

    /// `int_0^infty t^{2 rho - 1} F(t, theta) conj(G(t, theta)) dt` for the
    /// vertical functions of `f` and `g` at each theta.
    pub fn polarized(
        &self,
        f: &Expansion,
        g: &Expansion,
        thetas: &[f64],
        tq: &TimeQuadrature,
    ) -> Result<Vec<Complex64>> {
        self.validate()?;
        if f.params() != g.params() {
            return Err(Error::mismatch(*f.params(), *g.params()));
        }
        let len = f.len().max(g.len());
        let pad = |e: &Expansion| {
            let mut c = e.coeffs().to_vec();
            c.resize(len, Complex64::new(0.0, 0.0));
            Expansion::from_parts(*e.params(), c)
        };
        let (f, g) = (pad(f), pad(g));
        let p = *f.params();
        let hs: Vec<f64> = (0..len).map(|n| self.amplitude(&p, n)).collect();
        let rates: Vec<f64> = (0..len).map(|n| self.rate(&p, n)).collect();
        let active: Vec<usize> = (0..len).filter(|&n| hs[n] != 0.0).collect();
        if active.is_empty() {
            return Ok(vec![Complex64::new(0.0, 0.0); thetas.len()]);
        }
        let lo = active.iter().map(|&n| rates[n]).fold(f64::INFINITY, f64::min);
        let hi = active.iter().map(|&n| rates[n]).fold(0.0, f64::max);
        if (tq.rho() - self.rho()).abs() > 1e-15 || !tq.covers(lo, hi) {
            return Err(Error::InvalidArgument("time quadrature does not match the square function".into()));
        }
        let ev = PhiEvaluator::new(&p, len);
        let mut row = vec![0.0; len];
        let mut out = Vec::with_capacity(thetas.len());
        for &theta in thetas {
            ev.phi_into(theta, &mut row);
            let mut acc = Complex64::new(0.0, 0.0);
            for (&t, &w) in tq.nodes().iter().zip(tq.weights()) {
                let (mut fv, mut gv) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
                for &n in &active {
                    let k = hs[n] * (-t * rates[n]).exp() * row[n];
                    fv += f.coeffs()[n] * k;
                    gv += g.coeffs()[n] * k;
                }
                acc += w * fv * gv.conj();
            }
            out.push(acc);
        }
        Ok(out)
    }
}

/// Compacted active modes of a vertical exponential sum.
pub(crate) struct VerticalSum {
    pub(crate) cols: Vec<usize>,
    pub(crate) amps: Vec<Complex64>,
    pub(crate) rates: Vec<f64>,
}

impl VerticalSum {
    pub(crate) fn check(&self, rho: f64, tq: &TimeQuadrature) -> Result<()> {
        if (tq.rho() - rho).abs() > 1e-15 {
            return Err(Error::InvalidArgument(format!(
                "time quadrature built for rho={}, square function needs rho={rho}",
                tq.rho()
            )));
        }
        let lo = self.rates.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.rates.iter().copied().fold(0.0, f64::max);
        if !tq.covers(lo, hi) {
            return Err(Error::NonConvergent(format!(
                "time quadrature does not resolve decay rates [{lo}, {hi}]"
            )));
        }
        Ok(())
    }

    /// `T x A` table of `amp_a e^{-t_j r_a}`.
    pub(crate) fn table(&self, tq: &TimeQuadrature) -> Vec<Complex64> {
        let mut w = Vec::with_capacity(tq.len() * self.cols.len());
        for &t in tq.nodes() {
            for (a, &r) in self.amps.iter().zip(&self.rates) {
                w.push(a * (-t * r).exp());
            }
        }
        w
    }

    pub(crate) fn norms(
        &self,
        table: &[Complex64],
        tq: &TimeQuadrature,
        basis: &[f64],
        ncols: usize,
        exec: Execution,
    ) -> Vec<f64> {
        let rows = basis.len() / ncols;
        let na = self.cols.len();
        exec.map_indices(rows, |i| {
            let row = &basis[i * ncols..(i + 1) * ncols];
            let b: Vec<f64> = self.cols.iter().map(|&c| row[c]).collect();
            let mut acc = 0.0;
            for (j, &w) in tq.weights().iter().enumerate() {
                let t = &table[j * na..(j + 1) * na];
                let (mut re, mut im) = (0.0, 0.0);
                for (z, &bv) in t.iter().zip(&b) {
                    re += z.re * bv;
                    im += z.im * bv;
                }
                acc += w * (re * re + im * im);
            }
            acc.max(0.0).sqrt()
        })
    }
}

fn single(kind: SquareFunction, e: &Expansion, theta: f64, tq: &TimeQuadrature) -> Result<f64> {
    Ok(kind.evaluate(e, &[theta], tq, Execution::Sequential)?[0])
}

pub fn g_fractional(e: &Expansion, gamma: f64, theta: f64, tq: &TimeQuadrature) -> Result<f64> {
    single(SquareFunction::Fractional { gamma }, e, theta, tq)
}

pub fn g_fractional_k(e: &Expansion, gamma: f64, k: u32, theta: f64, tq: &TimeQuadrature) -> Result<f64> {
    single(SquareFunction::Higher { gamma, k }, e, theta, tq)
}

pub fn g_tilde(e: &Expansion, gamma: f64, theta: f64, tq: &TimeQuadrature) -> Result<f64> {
    single(SquareFunction::ModifiedFractional { gamma }, e, theta, tq)
}

pub fn g_tilde_k(e: &Expansion, gamma: f64, k: u32, theta: f64, tq: &TimeQuadrature) -> Result<f64> {
    single(SquareFunction::ModifiedHigher { gamma, k }, e, theta, tq)
}

/// Square function values on a grid with an automatically sized time rule.
pub fn square_function_on(
    kind: SquareFunction,
    e: &Expansion,
    thetas: &[f64],
    exec: Execution,
) -> Result<Vec<f64>> {
    match kind.time_quadrature(e.params(), e.len())? {
        None => Ok(vec![0.0; thetas.len()]),
        Some(tq) => kind.evaluate(e, thetas, &tq, exec),
    }
}

/// Closed form of the Caputo derivative of `t -> e^{-t sqrt(L)} f` at
/// `(t, theta)`; with `modified` the semigroup is `e^{-t} e^{-t sqrt(L)}`.
pub fn caputo_poisson_general(e: &Expansion, gamma: f64, t: f64, theta: f64, modified: bool) -> Result<Complex64> {
    check_gamma(gamma)?;
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("t must be > 0, got {t}")));
    }
    let kind = if modified {
        SquareFunction::ModifiedFractional { gamma }
    } else {
        SquareFunction::Fractional { gamma }
    };
    let p = e.params();
    let v = phi_all(p, e.len(), theta)?;
    Ok(e.coeffs()
        .iter()
        .enumerate()
        .map(|(n, a)| a * (kind.amplitude(p, n) * (-t * kind.rate(p, n)).exp() * v[n]))
        .sum())
}

pub fn caputo_poisson(e: &Expansion, gamma: f64, t: f64, theta: f64) -> Result<Complex64> {
    caputo_poisson_general(e, gamma, t, theta, false)
}

/// `1/Gamma(m - gamma) int_0^infty F^{(m)}(t + s) s^{m - gamma - 1} ds` by
/// adaptive quadrature, given the `m`-th derivative `dm`.
///
/// On `[0, 1]` the substitution `s = u^{1/(m - gamma)}` absorbs the
/// endpoint singularity; `[1, infinity)` is covered by doubling panels
/// until they stop contributing.
pub fn caputo_numeric(dm: impl Fn(f64) -> f64, gamma: f64, t: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let m = caputo_order(gamma);
    let nu = m as f64 - gamma;
    let tol = Tolerance {
        abs: 0.0,
        rel: 1e-12,
        max_intervals: 2000,
    };
    let head = integrate(|u: f64| dm(t + u.powf(1.0 / nu)), 0.0, 1.0, tol);
    let mut total = head.value / nu;
    let mut scale = head.value.abs() / nu;
    let mut quiet = 0;
    let mut a = 1.0;
    for _ in 0..200 {
        let b = 2.0 * a;
        let panel = integrate(|s: f64| dm(t + s) * s.powf(nu - 1.0), a, b, tol);
        total += panel.value;
        scale = scale.max(panel.value.abs());
        if panel.value.abs() <= 1e-16 * scale {
            quiet += 1;
            if quiet >= 2 {
                return Ok(total / gamma_fn(nu));
            }
        } else {
            quiet = 0;
        }
        a = b;
    }
    Err(Error::NonConvergent(format!(
        "Caputo tail integral did not decay (gamma={gamma}, t={t})"
    )))
}

/// Quadrature counterpart of [`caputo_poisson_general`], using the exact
/// `m`-th time derivative of the semigroup and [`caputo_numeric`].
pub fn caputo_numeric_poisson(e: &Expansion, gamma: f64, t: f64, theta: f64, modified: bool) -> Result<Complex64> {
    check_gamma(gamma)?;
    let m = caputo_order(gamma) as i32;
    let p = *e.params();
    let v = phi_all(&p, e.len(), theta)?;
    let rates: Vec<f64> = (0..e.len())
        .map(|n| p.sqrt_eigenvalue(n) + if modified { 1.0 } else { 0.0 })
        .collect();
    let terms: Vec<Complex64> = e
        .coeffs()
        .iter()
        .zip(&v)
        .zip(&rates)
        .map(|((a, &ph), &r)| a * ph * (-r).powi(m))
        .collect();
    let eval = |tt: f64, im: bool| -> f64 {
        terms
            .iter()
            .zip(&rates)
            .map(|(c, &r)| (if im { c.im } else { c.re }) * (-tt * r).exp())
            .sum()
    };
    let re = caputo_numeric(|s| eval(s, false), gamma, t)?;
    let im = caputo_numeric(|s| eval(s, true), gamma, t)?;
    Ok(Complex64::new(re, im))
}

/// Both sides of the `L^2` identity
/// `||f||^2 = 4^gamma / Gamma(2 gamma) ||g^gamma f||^2 + chi |a_0|^2`,
/// where `chi = 1` exactly for singular pairs.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct IsometryReport {
    pub lhs: f64,
    pub rhs: f64,
    pub rel_err: f64,
}

fn chi(params: &ParameterPair) -> f64 {
    if params.is_singular() {
        1.0
    } else {
        0.0
    }
}

pub fn l2_isometry_check(e: &Expansion, gamma: f64) -> Result<IsometryReport> {
    check_gamma(gamma)?;
    let p = *e.params();
    let rule = QuadratureRule::gauss_jacobi(e.len().max(1) + 1, &p, Measure::Lebesgue)?;
    let vals = e.synthesize_on(rule.nodes());
    let lhs: f64 = vals
        .iter()
        .zip(rule.theta_weights())
        .map(|(v, w)| w * v.norm_sqr())
        .sum();
    let g = square_function_on(SquareFunction::Fractional { gamma }, e, rule.nodes(), Execution::Sequential)?;
    let gsq: f64 = g.iter().zip(rule.theta_weights()).map(|(v, w)| w * v * v).sum();
    let a0 = e.coeffs().first().map(|c| c.norm_sqr()).unwrap_or(0.0);
    let rhs = 4f64.powf(gamma) / gamma_fn(2.0 * gamma) * gsq + chi(&p) * a0;
    Ok(IsometryReport {
        lhs,
        rhs,
        rel_err: (lhs - rhs).abs() / lhs.max(f64::MIN_POSITIVE),
    })
}

/// Polarized identity for `<f, g>`. The error is normalized by
/// `||f|| ||g||`, since `<f, g>` itself may vanish.
pub fn polarized_check(f: &Expansion, g: &Expansion, gamma: f64) -> Result<(Complex64, Complex64, f64)> {
    check_gamma(gamma)?;
    if f.params() != g.params() {
        return Err(Error::mismatch(*f.params(), *g.params()));
    }
    let p = *f.params();
    let len = f.len().max(g.len()).max(1);
    let rule = QuadratureRule::gauss_jacobi(len + 1, &p, Measure::Lebesgue)?;
    let fv = f.synthesize_on(rule.nodes());
    let gv = g.synthesize_on(rule.nodes());
    let lhs: Complex64 = fv
        .iter()
        .zip(&gv)
        .zip(rule.theta_weights())
        .map(|((a, b), w)| a * b.conj() * *w)
        .sum();
    let kind = SquareFunction::Fractional { gamma };
    let mut rhs = Complex64::new(0.0, 0.0);
    if let Some(tq) = kind.time_quadrature(&p, len)? {
        let vert = kind.polarized(f, g, rule.nodes(), &tq)?;
        let s: Complex64 = vert.iter().zip(rule.theta_weights()).map(|(v, w)| v * *w).sum();
        rhs += s * (4f64.powf(gamma) / gamma_fn(2.0 * gamma));
    }
    if p.is_singular() {
        let a0 = f.coeffs().first().copied().unwrap_or_default();
        let b0 = g.coeffs().first().copied().unwrap_or_default();
        rhs += a0 * b0.conj();
    }
    let scale = (f.l2_norm() * g.l2_norm()).max(f64::MIN_POSITIVE);
    Ok((lhs, rhs, (lhs - rhs).norm() / scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jacobi::phi;
    use approx::assert_relative_eq;

    #[test]
    fn single_mode_closed_form() {
        let p = ParameterPair::new(0.3, -0.2).unwrap();
        for &gamma in &[0.4, 1.0, 2.3] {
            for n in [0usize, 1, 5] {
                let e = Expansion::basis(p, n);
                let theta = 1.2;
                let got = square_function_on(SquareFunction::Fractional { gamma }, &e, &[theta], Execution::Sequential).unwrap()[0];
                let expect = phi(n as i64, &p, theta).unwrap().abs() * gamma_fn(2.0 * gamma).sqrt() / 2f64.powf(gamma);
                assert_relative_eq!(got, expect, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn singular_bottom_mode() {
        let p = ParameterPair::chebyshev();
        let e = Expansion::basis(p, 0);
        let g = square_function_on(SquareFunction::Fractional { gamma: 0.5 }, &e, &[1.0], Execution::Sequential).unwrap();
        assert_eq!(g[0], 0.0);
        let gt = square_function_on(SquareFunction::ModifiedFractional { gamma: 0.5 }, &e, &[1.0], Execution::Sequential).unwrap();
        assert!(gt[0] > 0.0);
    }

    #[test]
    fn caputo_of_exponential() {
        let c: f64 = 2.5;
        for &gamma in &[0.5, 1.0, 1.7] {
            let m = caputo_order(gamma) as i32;
            let got = caputo_numeric(|s| (-c).powi(m) * (-c * s).exp(), gamma, 0.4).unwrap();
            let expect = sign(m as u32) * c.powf(gamma) * (-c * 0.4).exp();
            assert_relative_eq!(got, expect, max_relative = 1e-9);
        }
    }

    #[test]
    fn caputo_half_sign() {
        let c: f64 = 4.0;
        let got = caputo_numeric(|s| -c * (-c * s).exp(), 0.5, 1.0).unwrap();
        assert_relative_eq!(got, -c.sqrt() * (-c).exp(), max_relative = 1e-9);
    }

    #[test]
    fn higher_order_requires_k_above_gamma() {
        assert!(SquareFunction::Higher { gamma: 1.5, k: 1 }.validate().is_err());
        assert!(SquareFunction::Higher { gamma: 1.5, k: 2 }.validate().is_ok());
    }
}
