//! Sampled functions on `(0, pi)` and their `L^p` norms.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::expansion::Expansion;
use crate::jacobi::{mu_density, psi_unchecked, PhiEvaluator};
use crate::params::ParameterPair;
use crate::quadrature::QuadratureRule;

/// Measure against which a [`GridFunction`] is integrated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GridMeasure {
    Lebesgue,
    Jacobi(ParameterPair),
    /// `w d mu` with `w = Psi^p / Psi^{2alpha+1/2, 2beta+1/2}`.
    PowerWeighted { params: ParameterPair, p: f64 },
}

impl GridMeasure {
    /// Density with respect to `d theta`.
    pub fn density(&self, theta: f64) -> f64 {
        match *self {
            GridMeasure::Lebesgue => 1.0,
            GridMeasure::Jacobi(params) => mu_density(theta, &params),
            GridMeasure::PowerWeighted { params, p } => {
                // Psi^{2alpha+1/2, 2beta+1/2}, written out since the doubled
                // indices need not form an admissible pair.
                let (s, c) = (0.5 * theta).sin_cos();
                let doubled = s.powf(2.0 * params.alpha() + 1.0) * c.powf(2.0 * params.beta() + 1.0);
                let w = psi_unchecked(theta, &params).powf(p) / doubled;
                w * mu_density(theta, &params)
            }
        }
    }
}

/// Values on interior nodes together with `d theta` quadrature weights.
#[derive(Clone, Debug)]
pub struct GridFunction {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    values: Vec<Complex64>,
    measure: GridMeasure,
}

impl GridFunction {
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>, values: Vec<Complex64>, measure: GridMeasure) -> Result<Self> {
        if nodes.len() != weights.len() || nodes.len() != values.len() {
            return Err(Error::InvalidArgument("grid arrays differ in length".into()));
        }
        if let Some(&t) = nodes.iter().find(|&&t| !(t > 0.0 && t < PI)) {
            return Err(Error::ThetaOutOfRange(t));
        }
        if let Some(i) = values.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self {
            nodes,
            weights,
            values,
            measure,
        })
    }

    /// Samples `e` at the nodes of `rule`.
    pub fn from_expansion(e: &Expansion, rule: &QuadratureRule, measure: GridMeasure) -> Result<Self> {
        let values = e.synthesize_on(rule.nodes());
        Self::new(rule.nodes().to_vec(), rule.theta_weights().to_vec(), values, measure)
    }

    /// Midpoint grid `theta_j = (j + 1/2) pi / m`.
    pub fn uniform(m: usize, f: impl Fn(f64) -> Complex64, measure: GridMeasure) -> Result<Self> {
        let nodes = uniform_nodes(m);
        let values = nodes.iter().map(|&t| f(t)).collect();
        Self::new(nodes, vec![PI / m as f64; m], values, measure)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn measure(&self) -> GridMeasure {
        self.measure
    }
}

pub fn uniform_nodes(m: usize) -> Vec<f64> {
    (0..m).map(|j| (j as f64 + 0.5) * PI / m as f64).collect()
}

fn check_p(p: f64) -> Result<()> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("norm exponent must be >= 1, got {p}")))
    }
}

/// `(int |g|^p d measure)^{1/p}`; the grid maximum for `p = infinity`.
pub fn lp_norm(g: &GridFunction, p: f64) -> Result<f64> {
    check_p(p)?;
    if p.is_infinite() {
        return Ok(g.values.iter().map(|v| v.norm()).fold(0.0, f64::max));
    }
    let s: f64 = g
        .nodes
        .iter()
        .zip(&g.weights)
        .zip(&g.values)
        .map(|((&t, &w), v)| w * g.measure.density(t) * v.norm().powf(p))
        .sum();
    Ok(s.powf(1.0 / p))
}

/// Sup of `|e|` over a midpoint grid of `m` points, confirmed on `2m`
/// points: if doubling moves the value by 1% or more the grid is rejected.
pub fn sup_norm_checked(e: &Expansion, m: usize) -> Result<f64> {
    let coarse = sup_on(e, m);
    let fine = sup_on(e, 2 * m);
    if (fine - coarse).abs() >= 0.01 * fine.max(f64::MIN_POSITIVE) {
        return Err(Error::UnderResolved(format!(
            "sup norm moved from {coarse} to {fine} when the grid doubled to {}",
            2 * m
        )));
    }
    Ok(fine)
}

fn sup_on(e: &Expansion, m: usize) -> f64 {
    e.synthesize_on(&uniform_nodes(m))
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max)
}

/// Precomputed evaluation grid for repeated `L^p(d theta)` norms of
/// expansions over a fixed pair and mode count.
///
/// For finite `p` the nodes and weights come from
/// [`QuadratureRule::for_lp`] and the stored basis is the polynomial one,
/// so `||f||_p^p = sum_i w_i |sum_n a_n \mathcal P_n(theta_i)|^p` with no
/// endpoint weight left in the integrand. For `p = infinity` the basis is
/// `phi_n` on a midpoint grid and the norm is the grid maximum.
#[derive(Clone, Debug)]
pub struct NormGrid {
    params: ParameterPair,
    p: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    basis: Vec<f64>,
    modes: usize,
}

impl NormGrid {
    pub fn new(params: &ParameterPair, modes: usize, p: f64, resolution: usize) -> Result<Self> {
        check_p(p)?;
        let modes = modes.max(1);
        if p.is_infinite() {
            let nodes = uniform_nodes(resolution);
            let basis = PhiEvaluator::new(params, modes).phi_matrix(&nodes, modes);
            return Ok(Self {
                params: *params,
                p,
                weights: vec![PI / resolution as f64; resolution],
                nodes,
                basis,
                modes,
            });
        }
        params.exponent_range().check(p)?;
        let rule = QuadratureRule::for_lp(resolution, params, p)?;
        let basis = PhiEvaluator::new(params, modes).poly_matrix(rule.nodes(), modes);
        Ok(Self {
            params: *params,
            p,
            nodes: rule.nodes().to_vec(),
            weights: rule.mu_weights().to_vec(),
            basis,
            modes,
        })
    }

    /// Grid for `L^p(w d mu)` of polynomial expansions `F = sum b_n \mathcal P_n`,
    /// with the power weight evaluated from its definition at each node.
    pub fn power_weighted(params: &ParameterPair, modes: usize, p: f64, resolution: usize) -> Result<Self> {
        check_p(p)?;
        if p.is_infinite() {
            return Err(Error::InvalidArgument("weighted norms need finite p".into()));
        }
        params.exponent_range().check(p)?;
        let modes = modes.max(1);
        let rule = QuadratureRule::for_lp(resolution, params, p)?;
        let measure = GridMeasure::PowerWeighted { params: *params, p };
        let weights = rule
            .nodes()
            .iter()
            .zip(rule.theta_weights())
            .map(|(&t, &w)| w * measure.density(t))
            .collect();
        let basis = PhiEvaluator::new(params, modes).poly_matrix(rule.nodes(), modes);
        Ok(Self {
            params: *params,
            p,
            nodes: rule.nodes().to_vec(),
            weights,
            basis,
            modes,
        })
    }

    pub fn params(&self) -> &ParameterPair {
        &self.params
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Row-major `nodes x modes` basis matrix.
    pub fn basis(&self) -> &[f64] {
        &self.basis
    }

    fn check(&self, e: &Expansion) -> Result<()> {
        if e.params() != &self.params {
            return Err(Error::mismatch(self.params, *e.params()));
        }
        if e.len() > self.modes {
            return Err(Error::ResolutionMismatch {
                nodes: self.modes,
                modes: e.len(),
            });
        }
        Ok(())
    }

    /// Basis combination at every node (polynomial values for finite `p`).
    pub fn values(&self, e: &Expansion) -> Result<Vec<Complex64>> {
        self.check(e)?;
        let c = e.coeffs();
        Ok(self
            .basis
            .chunks(self.modes)
            .map(|row| c.iter().zip(row).map(|(a, &b)| a * b).sum())
            .collect())
    }

    /// Norm of nonnegative samples already living on this grid.
    pub fn norm_of_samples(&self, samples: &[f64]) -> f64 {
        if self.p.is_infinite() {
            return samples.iter().copied().fold(0.0, f64::max);
        }
        let s: f64 = samples
            .iter()
            .zip(&self.weights)
            .map(|(&v, &w)| w * v.powf(self.p))
            .sum();
        s.powf(1.0 / self.p)
    }

    pub fn norm(&self, e: &Expansion) -> Result<f64> {
        let v: Vec<f64> = self.values(e)?.iter().map(|z| z.norm()).collect();
        Ok(self.norm_of_samples(&v))
    }

    /// Square-function samples matching [`Self::norm_of_samples`]: for
    /// finite `p` the weight `Psi` is divided out, i.e. the polynomial
    /// basis is used.
    pub fn square_function_samples(
        &self,
        kind: crate::fractional::SquareFunction,
        e: &Expansion,
        tq: &crate::timequad::TimeQuadrature,
        exec: crate::exec::Execution,
    ) -> Result<Vec<f64>> {
        self.check(e)?;
        if e.len() == self.modes {
            return kind.evaluate_on_basis(e, &self.basis, tq, exec);
        }
        let mut padded = e.coeffs().to_vec();
        padded.resize(self.modes, Complex64::new(0.0, 0.0));
        let e = Expansion::new(*e.params(), padded)?;
        kind.evaluate_on_basis(&e, &self.basis, tq, exec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::Measure;
    use approx::assert_relative_eq;

    #[test]
    fn constant_on_lebesgue() {
        let g = GridFunction::uniform(64, |_| Complex64::new(1.0, 0.0), GridMeasure::Lebesgue).unwrap();
        assert_relative_eq!(lp_norm(&g, 2.0).unwrap(), PI.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(lp_norm(&g, f64::INFINITY).unwrap(), 1.0);
    }

    #[test]
    fn phi0_unit_norm() {
        let p = ParameterPair::new(0.4, -0.3).unwrap();
        let rule = QuadratureRule::gauss_jacobi(8, &p, Measure::Lebesgue).unwrap();
        let g = GridFunction::from_expansion(&Expansion::basis(p, 0), &rule, GridMeasure::Lebesgue).unwrap();
        assert_relative_eq!(lp_norm(&g, 2.0).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn cosine_l4() {
        let p = ParameterPair::chebyshev();
        let grid = NormGrid::new(&p, 2, 4.0, 8).unwrap();
        let expect = (2.0 / PI).sqrt() * (3.0 * PI / 8.0).powf(0.25);
        assert_relative_eq!(grid.norm(&Expansion::basis(p, 1)).unwrap(), expect, epsilon = 1e-13);
    }

    #[test]
    fn rejects_exterior_nodes() {
        let r = GridFunction::new(vec![0.0], vec![1.0], vec![Complex64::new(1.0, 0.0)], GridMeasure::Lebesgue);
        assert!(r.is_err());
    }
}
