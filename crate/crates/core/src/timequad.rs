//! Quadrature for vertical integrals `int_0^infty t^{2rho-1} F(t) dt`.
//!
//! The integrands are (squared moduli of) finite exponential sums
//! `sum_n c_n e^{-t r_n}`. Under `t = e^u` they become analytic in a strip
//! and decay doubly exponentially on the right and like `e^{2 rho u}` on
//! the left, so the plain trapezoid rule in `u` converges geometrically.
//! With a positive floor `t >= t_floor` the left end is cut and a
//! panelled Gauss-Legendre rule with a constant-extrapolated head is used.

use crate::error::{Error, Result};
use crate::quadrature::QuadratureRule;

/// Step in `u = ln t`. The aliasing error is about `exp(-pi^2 / h)`.
const LOG_STEP: f64 = 0.125;
/// Target relative truncation on either end.
const TRUNCATION_LOG: f64 = 37.0;

#[derive(Clone, Debug)]
pub struct TimeQuadrature {
    rho: f64,
    rate_min: f64,
    rate_max: f64,
    floor: Option<f64>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

fn validate(rho: f64, rate_min: f64, rate_max: f64) -> Result<()> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::InvalidArgument(format!("vertical exponent must be > 0, got {rho}")));
    }
    if !(rate_min > 0.0) || !(rate_max >= rate_min) || !rate_max.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "decay rates must satisfy 0 < min <= max < inf, got [{rate_min}, {rate_max}]"
        )));
    }
    Ok(())
}

/// Right end: `e^{-c t} (c t)^{2 rho - 1}` is negligible past this `c t`.
fn upper_scaled(rho: f64) -> f64 {
    let m = (2.0 * rho - 1.0).max(0.0);
    let mut u: f64 = TRUNCATION_LOG + 3.0;
    for _ in 0..8 {
        u = TRUNCATION_LOG + 3.0 + m * u.ln();
    }
    u
}

impl TimeQuadrature {
    /// Rule for integrands whose exponential rates lie in
    /// `[rate_min, rate_max]` (the squared modulus has rates up to twice
    /// that).
    pub fn new(rho: f64, rate_min: f64, rate_max: f64) -> Result<Self> {
        validate(rho, rate_min, rate_max)?;
        let (c_min, c_max) = (2.0 * rate_min, 2.0 * rate_max);
        let u_lo = -TRUNCATION_LOG / (2.0 * rho) - c_max.ln();
        let u_hi = (upper_scaled(rho) / c_min).ln();
        if u_lo < -700.0 {
            return Err(Error::InvalidArgument(format!(
                "vertical exponent {rho} too small for double precision"
            )));
        }
        let steps = ((u_hi - u_lo) / LOG_STEP).ceil() as usize;
        let mut nodes = Vec::with_capacity(steps + 1);
        let mut weights = Vec::with_capacity(steps + 1);
        for j in 0..=steps {
            let u = u_lo + j as f64 * LOG_STEP;
            let t = u.exp();
            nodes.push(t);
            // dt/t = du, and t^{2 rho - 1} dt = t^{2 rho} du
            weights.push(LOG_STEP * (2.0 * rho * u).exp());
        }
        Ok(Self {
            rho,
            rate_min,
            rate_max,
            floor: None,
            nodes,
            weights,
        })
    }

    /// Rule on `[t_floor, infinity)` plus the head
    /// `F(t_floor) t_floor^{2 rho} / (2 rho)` standing in for `[0, t_floor]`.
    pub fn with_floor(rho: f64, rate_min: f64, t_floor: f64) -> Result<Self> {
        validate(rho, rate_min, rate_min)?;
        if !(t_floor > 0.0) {
            return Err(Error::InvalidArgument(format!("t_floor must be > 0, got {t_floor}")));
        }
        let u_lo = t_floor.ln();
        let u_hi = (upper_scaled(rho) / (2.0 * rate_min)).ln().max(u_lo + 1.0);
        let panels = ((u_hi - u_lo) / 0.5).ceil() as usize;
        let width = (u_hi - u_lo) / panels as f64;
        let gl = QuadratureRule::gauss_legendre(10, 0.0, width)?;
        let mut nodes = vec![t_floor];
        let mut weights = vec![t_floor.powf(2.0 * rho) / (2.0 * rho)];
        for p in 0..panels {
            let base = u_lo + p as f64 * width;
            for (&x, &w) in gl.nodes().iter().zip(gl.theta_weights()) {
                let u = base + x;
                nodes.push(u.exp());
                weights.push(w * (2.0 * rho * u).exp());
            }
        }
        Ok(Self {
            rho,
            rate_min,
            rate_max: f64::INFINITY,
            floor: Some(t_floor),
            nodes,
            weights,
        })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn floor(&self) -> Option<f64> {
        self.floor
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights already include `t^{2 rho - 1} dt`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Whether integrands with these rates are resolved by this rule.
    pub fn covers(&self, rate_min: f64, rate_max: f64) -> bool {
        rate_min >= self.rate_min * (1.0 - 1e-12) && rate_max <= self.rate_max * (1.0 + 1e-12)
    }

    /// `int t^{2 rho - 1} f(t) dt`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use statrs::function::gamma::gamma;

    #[test]
    fn reproduces_gamma_moments() {
        for &rho in &[0.25, 0.5, 1.3, 3.5, 5.0] {
            for &(rmin, rmax) in &[(0.5, 0.5), (1.0, 40.0), (3.0, 500.0)] {
                let q = TimeQuadrature::new(rho, rmin, rmax).unwrap();
                for &r in &[rmin, (rmin * rmax).sqrt(), rmax] {
                    let c = 2.0 * r;
                    let got = q.integrate(|t| (-c * t).exp());
                    let expect = gamma(2.0 * rho) / c.powf(2.0 * rho);
                    assert_relative_eq!(got, expect, max_relative = 1e-10);
                }
            }
        }
    }

    #[test]
    fn floored_rule_is_accurate_for_smooth_heads() {
        let rho = 0.75;
        let q = TimeQuadrature::with_floor(rho, 0.5, 1e-4).unwrap();
        let got = q.integrate(|t| (-t).exp());
        assert_relative_eq!(got, gamma(2.0 * rho), max_relative = 1e-4);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(TimeQuadrature::new(0.0, 1.0, 2.0).is_err());
        assert!(TimeQuadrature::new(1.0, 0.0, 2.0).is_err());
        assert!(TimeQuadrature::new(1.0, 3.0, 2.0).is_err());
    }
}
