//! Jacobi polynomials and the trigonometric functions `phi_n^{alpha,beta}`.
//!
//! Everything is evaluated through the three-term recurrence of the
//! polynomials that are orthonormal for
//! `d mu = sin^{2alpha+1}(theta/2) cos^{2beta+1}(theta/2) d theta`,
//! which stays stable well past `n = 10^5`. The classical normalization
//! `P_n(1) = binom(n + alpha, n)` is available separately.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::params::ParameterPair;
use std::f64::consts::PI;

/// Classical Jacobi polynomial `P_n^{(alpha,beta)}(x)`.
pub fn jacobi_polynomial(n: usize, params: &ParameterPair, x: f64) -> f64 {
    let (a, b) = (params.alpha(), params.beta());
    let s = a + b;
    let mut p0 = 1.0;
    if n == 0 {
        return p0;
    }
    let mut p1 = (a + 1.0) + (s + 2.0) * (x - 1.0) / 2.0;
    for k in 2..=n {
        let k = k as f64;
        let c = 2.0 * k + s;
        let lhs = 2.0 * k * (k + s) * (c - 2.0);
        let t1 = (c - 1.0) * (c * (c - 2.0) * x + a * a - b * b);
        let t2 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * c;
        let p2 = (t1 * p1 - t2 * p0) / lhs;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// `ln c_n^2`, where `c_n P_n` has unit norm in `L^2(d mu)`.
fn ln_norm_sq(n: usize, params: &ParameterPair) -> f64 {
    let (a, b) = (params.alpha(), params.beta());
    let s = a + b;
    if n == 0 {
        return ln_gamma(s + 2.0) - ln_gamma(a + 1.0) - ln_gamma(b + 1.0);
    }
    let nf = n as f64;
    (2.0 * nf + s + 1.0).ln() + ln_gamma(nf + s + 1.0) + ln_gamma(nf + 1.0)
        - ln_gamma(nf + a + 1.0)
        - ln_gamma(nf + b + 1.0)
}

/// `c_n^{alpha,beta}`.
pub fn normalization_constant(n: usize, params: &ParameterPair) -> f64 {
    (0.5 * ln_norm_sq(n, params)).exp()
}

/// Total `d mu` mass, `B(alpha + 1, beta + 1)`.
pub fn mu_mass(params: &ParameterPair) -> f64 {
    (-ln_norm_sq(0, params)).exp()
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta < PI {
        Ok(())
    } else {
        Err(Error::ThetaOutOfRange(theta))
    }
}

/// `Psi(theta) = sin(theta/2)^{alpha+1/2} cos(theta/2)^{beta+1/2}`.
pub fn psi_weight(theta: f64, params: &ParameterPair) -> Result<f64> {
    check_theta(theta)?;
    Ok(psi_unchecked(theta, params))
}

pub(crate) fn psi_unchecked(theta: f64, params: &ParameterPair) -> f64 {
    let (s, c) = (0.5 * theta).sin_cos();
    s.powf(params.alpha() + 0.5) * c.powf(params.beta() + 0.5)
}

/// Density of `d mu` with respect to `d theta`, i.e. `Psi(theta)^2`.
pub fn mu_density(theta: f64, params: &ParameterPair) -> f64 {
    let (s, c) = (0.5 * theta).sin_cos();
    s.powf(2.0 * params.alpha() + 1.0) * c.powf(2.0 * params.beta() + 1.0)
}

/// Diagonal entry `b_n` of the Jacobi matrix in the variable `x = cos theta`.
pub(crate) fn diag_coeff(params: &ParameterPair, n: usize) -> f64 {
    let (a, b) = (params.alpha(), params.beta());
    let s = a + b;
    if n == 0 {
        return (b - a) / (s + 2.0);
    }
    let c = 2.0 * n as f64 + s;
    (b * b - a * a) / (c * (c + 2.0))
}

/// Off-diagonal entry `a_n`, `n >= 1`.
pub(crate) fn off_coeff(params: &ParameterPair, n: usize) -> f64 {
    debug_assert!(n >= 1);
    let (a, b) = (params.alpha(), params.beta());
    let s = a + b;
    if n == 1 {
        let sq = 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + s) * (2.0 + s) * (3.0 + s));
        return sq.sqrt();
    }
    let nf = n as f64;
    let c = 2.0 * nf + s;
    let sq = 4.0 * nf * (nf + a) * (nf + b) * (nf + s) / (c * c * (c + 1.0) * (c - 1.0));
    sq.sqrt()
}

/// Cached recurrence coefficients for the `d mu`-orthonormal polynomials.
#[derive(Clone, Debug)]
pub struct Recurrence {
    params: ParameterPair,
    p0: f64,
    diag: Vec<f64>,
    // off[k] = a_{k+1}
    off: Vec<f64>,
}

impl Recurrence {
    /// Coefficients for degrees `0..len`.
    pub fn new(params: &ParameterPair, len: usize) -> Self {
        let len = len.max(1);
        Self {
            params: *params,
            p0: normalization_constant(0, params),
            diag: (0..len).map(|n| diag_coeff(params, n)).collect(),
            off: (1..len).map(|n| off_coeff(params, n)).collect(),
        }
    }

    pub fn params(&self) -> &ParameterPair {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    pub fn off_diagonal(&self) -> &[f64] {
        &self.off
    }

    /// Writes the orthonormal polynomials at `x` for degrees `0..out.len()`.
    pub fn eval_into(&self, x: f64, out: &mut [f64]) {
        assert!(out.len() <= self.len(), "recurrence too short");
        if out.is_empty() {
            return;
        }
        out[0] = self.p0;
        if out.len() == 1 {
            return;
        }
        out[1] = (x - self.diag[0]) * self.p0 / self.off[0];
        for n in 1..out.len() - 1 {
            out[n + 1] =
                ((x - self.diag[n]) * out[n] - self.off[n - 1] * out[n - 1]) / self.off[n];
        }
    }

    pub fn eval(&self, x: f64, len: usize) -> Vec<f64> {
        let mut out = vec![0.0; len];
        self.eval_into(x, &mut out);
        out
    }
}

/// Orthonormal polynomial values `\mathcal P_n(theta)` for `n < len`.
pub fn poly_all(params: &ParameterPair, len: usize, theta: f64) -> Vec<f64> {
    Recurrence::new(params, len).eval(theta.cos(), len)
}

/// `phi_n(theta) = Psi(theta) \mathcal P_n(theta)`; zero for negative `n`.
pub fn phi(n: i64, params: &ParameterPair, theta: f64) -> Result<f64> {
    check_theta(theta)?;
    if n < 0 {
        return Ok(0.0);
    }
    let n = n as usize;
    let vals = poly_all(params, n + 1, theta);
    Ok(psi_unchecked(theta, params) * vals[n])
}

/// `phi_0(theta), ..., phi_{len-1}(theta)`.
pub fn phi_all(params: &ParameterPair, len: usize, theta: f64) -> Result<Vec<f64>> {
    check_theta(theta)?;
    let psi = psi_unchecked(theta, params);
    let mut v = poly_all(params, len, theta);
    v.iter_mut().for_each(|x| *x *= psi);
    Ok(v)
}

/// Evaluates `phi_n` at many nodes with one shared recurrence.
#[derive(Clone, Debug)]
pub struct PhiEvaluator {
    rec: Recurrence,
}

impl PhiEvaluator {
    pub fn new(params: &ParameterPair, len: usize) -> Self {
        Self {
            rec: Recurrence::new(params, len),
        }
    }

    pub fn len(&self) -> usize {
        self.rec.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `phi_n(theta)` for `n < out.len()`; `theta` is not range-checked.
    pub fn phi_into(&self, theta: f64, out: &mut [f64]) {
        self.rec.eval_into(theta.cos(), out);
        let psi = psi_unchecked(theta, self.rec.params());
        out.iter_mut().for_each(|x| *x *= psi);
    }

    pub fn poly_into(&self, theta: f64, out: &mut [f64]) {
        self.rec.eval_into(theta.cos(), out);
    }

    /// Row-major `nodes.len() x len` matrix of `phi_n(node)`.
    pub fn phi_matrix(&self, nodes: &[f64], len: usize) -> Vec<f64> {
        let mut m = vec![0.0; nodes.len() * len];
        for (row, &t) in m.chunks_mut(len.max(1)).zip(nodes) {
            if len > 0 {
                self.phi_into(t, row);
            }
        }
        m
    }

    pub fn poly_matrix(&self, nodes: &[f64], len: usize) -> Vec<f64> {
        let mut m = vec![0.0; nodes.len() * len];
        for (row, &t) in m.chunks_mut(len.max(1)).zip(nodes) {
            if len > 0 {
                self.poly_into(t, row);
            }
        }
        m
    }
}

/// `d/dtheta \mathcal P_n^{alpha,beta}(theta)` for `n < len`, from
/// `-sqrt(n(n+alpha+beta+1)) sin(theta/2) cos(theta/2) \mathcal P_{n-1}^{alpha+1,beta+1}`.
pub fn poly_derivative_all(params: &ParameterPair, len: usize, theta: f64) -> Vec<f64> {
    let mut out = vec![0.0; len];
    if len < 2 {
        return out;
    }
    let shifted = poly_all(&params.shifted(1), len - 1, theta);
    let sc = 0.5 * theta.sin();
    for n in 1..len {
        out[n] = -params.eigenvalue_gap(n).sqrt() * sc * shifted[n - 1];
    }
    out
}

/// `lambda_n^{alpha,beta}`.
pub fn eigenvalue(n: usize, params: &ParameterPair) -> f64 {
    params.eigenvalue(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pair(a: f64, b: f64) -> ParameterPair {
        ParameterPair::new(a, b).unwrap()
    }

    #[test]
    fn classical_low_degree() {
        // Legendre P_3(x) = (5x^3 - 3x)/2.
        let p = pair(0.0, 0.0);
        let x: f64 = 0.3;
        assert_relative_eq!(
            jacobi_polynomial(3, &p, x),
            (5.0 * x.powi(3) - 3.0 * x) / 2.0,
            epsilon = 1e-15
        );
        // P_n(1) = binom(n + alpha, n).
        let q = pair(1.5, -0.25);
        assert_relative_eq!(jacobi_polynomial(2, &q, 1.0), 2.5 * 3.5 / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn orthonormal_matches_scaled_classical() {
        let p = pair(0.3, -0.6);
        let theta: f64 = 1.1;
        let v = poly_all(&p, 12, theta);
        for (n, &vn) in v.iter().enumerate() {
            let expect = normalization_constant(n, &p) * jacobi_polynomial(n, &p, theta.cos());
            assert_relative_eq!(vn, expect, max_relative = 1e-12);
        }
    }

    #[test]
    fn cosine_system() {
        let p = ParameterPair::chebyshev();
        let theta = 0.7;
        let v = phi_all(&p, 6, theta).unwrap();
        assert_relative_eq!(v[0], 1.0 / PI.sqrt(), epsilon = 1e-15);
        for (n, &vn) in v.iter().enumerate().skip(1) {
            assert_relative_eq!(vn, (2.0 / PI).sqrt() * (n as f64 * theta).cos(), epsilon = 1e-14);
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let p = pair(-0.3, 0.8);
        let theta = 1.3;
        let h = 1e-6;
        let d = poly_derivative_all(&p, 9, theta);
        let up = poly_all(&p, 9, theta + h);
        let dn = poly_all(&p, 9, theta - h);
        for n in 0..9 {
            assert_relative_eq!(d[n], (up[n] - dn[n]) / (2.0 * h), epsilon = 1e-6);
        }
    }

    #[test]
    fn theta_range() {
        let p = pair(0.0, 0.0);
        assert!(phi(1, &p, 0.0).is_err());
        assert!(phi(1, &p, PI).is_err());
        assert_eq!(phi(-1, &p, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn mass() {
        assert_relative_eq!(mu_mass(&pair(0.0, 0.0)), 1.0, epsilon = 1e-14);
        assert_relative_eq!(mu_mass(&ParameterPair::chebyshev()), PI, epsilon = 1e-13);
    }
}
