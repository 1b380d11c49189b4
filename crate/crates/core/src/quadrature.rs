//! Gauss-Jacobi rules in the angle variable.
//!
//! Nodes come from the eigenvalues of the Jacobi matrix, are polished by
//! Newton steps on `\mathcal P_N`, and carry Christoffel weights. A rule
//! with `N` nodes integrates `P * Q * d mu` exactly whenever
//! `deg P + deg Q <= 2N - 1`; equivalently it is exact in `d theta` for
//! products `phi_n phi_m` with `n + m <= 2N - 1`.

use crate::error::{Error, Result};
use crate::jacobi::{diag_coeff, off_coeff, psi_unchecked, Recurrence};
use crate::params::ParameterPair;

/// Largest rule the crate will build.
pub const MAX_NODES: usize = 4096;

/// Which measure the stored weights integrate against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Measure {
    Lebesgue,
    Jacobi,
}

#[derive(Clone, Debug)]
pub struct QuadratureRule {
    params: ParameterPair,
    nodes: Vec<f64>,
    mu_weights: Vec<f64>,
    theta_weights: Vec<f64>,
    measure: Measure,
}

impl QuadratureRule {
    /// `N`-point rule for `(alpha, beta)`, nodes in `(0, pi)` increasing.
    pub fn gauss_jacobi(n: usize, params: &ParameterPair, measure: Measure) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("quadrature needs at least one node".into()));
        }
        if n > MAX_NODES {
            return Err(Error::QuadratureCap {
                requested: n,
                cap: MAX_NODES,
            });
        }
        let mut d: Vec<f64> = (0..n).map(|k| diag_coeff(params, k)).collect();
        let mut e: Vec<f64> = (1..n).map(|k| off_coeff(params, k)).collect();
        e.push(0.0);
        tridiagonal_eigenvalues(&mut d, &mut e)?;

        let rec = Recurrence::new(params, n + 1);
        let mut nodes: Vec<f64> = d.iter().map(|x| x.clamp(-1.0, 1.0).acos()).collect();
        nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());

        let mut vals = vec![0.0; n + 1];
        let mut mu_weights = Vec::with_capacity(n);
        for theta in nodes.iter_mut() {
            for _ in 0..3 {
                let step = newton_step(&rec, *theta, &mut vals);
                let next = *theta - step;
                if !(next > 0.0 && next < std::f64::consts::PI) {
                    break;
                }
                *theta = next;
                if step.abs() <= 1e-16 * theta.abs().max(1.0) {
                    break;
                }
            }
            rec.eval_into(theta.cos(), &mut vals[..n]);
            let s: f64 = vals[..n].iter().map(|v| v * v).sum();
            mu_weights.push(1.0 / s);
        }
        let theta_weights = nodes
            .iter()
            .zip(&mu_weights)
            .map(|(&t, &w)| {
                let psi = psi_unchecked(t, params);
                w / (psi * psi)
            })
            .collect();
        Ok(Self {
            params: *params,
            nodes,
            mu_weights,
            theta_weights,
            measure,
        })
    }

    /// Rule used for `L^p` norms of `phi`-expansions.
    ///
    /// `|f|^p d theta = |F|^p Psi^p d theta` with `F = f / Psi` a polynomial
    /// in `cos theta`, and `Psi^p` is the `d mu` density for
    /// `(p(alpha+1/2)/2 - 1/2, p(beta+1/2)/2 - 1/2)`. Gauss nodes for that pair
    /// remove the endpoint singularity from the integrand. The rule exists
    /// exactly when `p` lies in the exponent interval.
    pub fn for_lp(n: usize, params: &ParameterPair, p: f64) -> Result<Self> {
        if !(p >= 1.0) || p.is_infinite() {
            return Err(Error::InvalidArgument(format!("L^p rule needs finite p >= 1, got {p}")));
        }
        let a = p * (params.alpha() + 0.5) / 2.0 - 0.5;
        let b = p * (params.beta() + 0.5) / 2.0 - 0.5;
        let shifted = ParameterPair::new(a, b).map_err(|_| {
            let r = params.exponent_range();
            Error::ExponentOutsidePencil {
                p,
                lower: r.lower,
                upper: r.upper,
            }
        })?;
        let mut rule = Self::gauss_jacobi(n, &shifted, Measure::Lebesgue)?;
        rule.params = shifted;
        Ok(rule)
    }

    /// Gauss-Legendre on `[a, b]` in the angle variable, as a Lebesgue rule.
    pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Result<Self> {
        let leg = ParameterPair::new(0.0, 0.0).expect("valid pair");
        // x-nodes of Legendre = cos(theta_i); weights in dx = 2 * mu-weights.
        let base = Self::gauss_jacobi(n, &leg, Measure::Jacobi)?;
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for (&t, &w) in base.nodes.iter().zip(&base.mu_weights).rev() {
            nodes.push(mid + half * t.cos());
            weights.push(2.0 * w * half);
        }
        Ok(Self {
            params: leg,
            nodes,
            mu_weights: weights.clone(),
            theta_weights: weights,
            measure: Measure::Lebesgue,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The pair whose orthogonality measure generated the nodes.
    pub fn params(&self) -> &ParameterPair {
        &self.params
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights for the measure given by [`Self::measure`].
    pub fn weights(&self) -> &[f64] {
        match self.measure {
            Measure::Lebesgue => &self.theta_weights,
            Measure::Jacobi => &self.mu_weights,
        }
    }

    pub fn theta_weights(&self) -> &[f64] {
        &self.theta_weights
    }

    pub fn mu_weights(&self) -> &[f64] {
        &self.mu_weights
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(self.weights())
            .map(|(&t, &w)| w * f(t))
            .sum()
    }
}

/// Newton correction in theta for a zero of `\mathcal P_N(cos theta)`.
fn newton_step(rec: &Recurrence, theta: f64, work: &mut [f64]) -> f64 {
    let n = work.len() - 1;
    let x = theta.cos();
    let diag = rec.diagonal();
    let off = rec.off_diagonal();
    // Value and x-derivative by the differentiated recurrence.
    rec.eval_into(x, &mut work[..1]);
    let (mut pm, mut p) = (0.0, work[0]);
    let (mut dm, mut d) = (0.0, 0.0);
    for k in 0..n {
        let a_prev = if k == 0 { 0.0 } else { off[k - 1] };
        let pn = ((x - diag[k]) * p - a_prev * pm) / off[k];
        let dn = ((x - diag[k]) * d + p - a_prev * dm) / off[k];
        pm = p;
        p = pn;
        dm = d;
        d = dn;
    }
    // d/dtheta = -sin(theta) d/dx
    let dtheta = -theta.sin() * d;
    if dtheta == 0.0 {
        0.0
    } else {
        p / dtheta
    }
}

/// Eigenvalues of a symmetric tridiagonal matrix by implicit QL.
///
/// `d` holds the diagonal, `e[i]` the entry coupling `i` and `i + 1`
/// (the last slot is workspace). On return `d` holds the eigenvalues.
pub fn tridiagonal_eigenvalues(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    assert_eq!(e.len(), n);
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::EigenFailure(n));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jacobi::{mu_mass, phi_all};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn tridiagonal_known_spectrum() {
        // 2 on the diagonal, -1 off: eigenvalues 2 - 2cos(k pi/(n+1)).
        let n = 7;
        let mut d = vec![2.0; n];
        let mut e = vec![-1.0; n];
        tridiagonal_eigenvalues(&mut d, &mut e).unwrap();
        d.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (k, &ev) in d.iter().enumerate() {
            let expect = 2.0 - 2.0 * ((k + 1) as f64 * PI / (n + 1) as f64).cos();
            assert_relative_eq!(ev, expect, epsilon = 1e-13);
        }
    }

    #[test]
    fn single_node_legendre() {
        let p = ParameterPair::new(0.0, 0.0).unwrap();
        let r = QuadratureRule::gauss_jacobi(1, &p, Measure::Jacobi).unwrap();
        assert_relative_eq!(r.nodes()[0], PI / 2.0, epsilon = 1e-15);
        assert_relative_eq!(r.weights()[0], mu_mass(&p), epsilon = 1e-15);
    }

    #[test]
    fn chebyshev_nodes() {
        let p = ParameterPair::chebyshev();
        let n = 9;
        let r = QuadratureRule::gauss_jacobi(n, &p, Measure::Lebesgue).unwrap();
        for (i, (&t, &w)) in r.nodes().iter().zip(r.weights()).enumerate() {
            assert_relative_eq!(t, (2 * i + 1) as f64 * PI / (2 * n) as f64, epsilon = 1e-14);
            assert_relative_eq!(w, PI / n as f64, epsilon = 1e-14);
        }
    }

    #[test]
    fn orthonormality_is_exact() {
        let p = ParameterPair::new(-0.7, 1.3).unwrap();
        let n = 20;
        let r = QuadratureRule::gauss_jacobi(n, &p, Measure::Lebesgue).unwrap();
        let rows: Vec<Vec<f64>> = r.nodes().iter().map(|&t| phi_all(&p, n, t).unwrap()).collect();
        for a in 0..n {
            for b in 0..n {
                let g: f64 = rows
                    .iter()
                    .zip(r.weights())
                    .map(|(row, w)| w * row[a] * row[b])
                    .sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((g - expect).abs() < 1e-12, "({a},{b}) -> {g}");
            }
        }
    }

    #[test]
    fn legendre_panel() {
        let r = QuadratureRule::gauss_legendre(8, 0.2, 1.7).unwrap();
        let v = r.integrate(|t| t.powi(9));
        assert_relative_eq!(v, (1.7f64.powi(10) - 0.2f64.powi(10)) / 10.0, max_relative = 1e-13);
    }

    #[test]
    fn lp_rule_outside_pencil() {
        let p = ParameterPair::new(-0.75, 0.0).unwrap();
        assert!(QuadratureRule::for_lp(16, &p, 3.0).is_ok());
        assert!(QuadratureRule::for_lp(16, &p, 4.0).is_err());
    }

    #[test]
    fn cap() {
        let p = ParameterPair::new(0.0, 0.0).unwrap();
        assert!(matches!(
            QuadratureRule::gauss_jacobi(MAX_NODES + 1, &p, Measure::Jacobi),
            Err(Error::QuadratureCap { .. })
        ));
    }
}
