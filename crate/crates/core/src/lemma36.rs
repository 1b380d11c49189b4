//! The double integral
//! `I(q) = int_0^1 (int_0^1 t^{2gamma-1} ((t+s)^2 + q)^{-eta} dt)^{1/2} s^xi ds`
//! and its comparison with `q^{-(eta-xi-gamma-1)/2}` or `log(4/q)`.

use serde::{Deserialize, Serialize};
use std::time::Instant;

use crate::error::{Error, Result};
use crate::integrate::{integrate_with_breaks, Tolerance};
use crate::report::{Check, ExperimentReport, Stats, Table};

/// Largest allowed growth of `I(q) / bound(q)` relative to its value at
/// the largest `q`.
pub const SPREAD_LIMIT: f64 = 5.0;

/// Cut below which the integrands are replaced by their constant limit,
/// relative to the natural length scale.
const HEAD_FRACTION: f64 = 1e-8;

const TOL: Tolerance = Tolerance {
    abs: 0.0,
    rel: 1e-11,
    max_intervals: 2000,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma36Params {
    pub eta: f64,
    pub xi: f64,
    pub gamma: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `eta - xi - gamma > 1`: `q^{-(eta-xi-gamma-1)/2}`.
    Power,
    /// `eta - xi - gamma <= 1`: `log(4/q)`.
    Log,
}

impl Lemma36Params {
    pub fn new(eta: f64, xi: f64, gamma: f64) -> Result<Self> {
        if !eta.is_finite() || !(xi > -1.0) || !(gamma > 0.0) || !xi.is_finite() || !gamma.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "need finite eta, xi > -1 and gamma > 0; got eta={eta}, xi={xi}, gamma={gamma}"
            )));
        }
        Ok(Self { eta, xi, gamma })
    }

    pub fn excess(&self) -> f64 {
        self.eta - self.xi - self.gamma
    }

    pub fn branch(&self) -> Branch {
        if self.excess() > 1.0 {
            Branch::Power
        } else {
            Branch::Log
        }
    }

    pub fn bound(&self, q: f64) -> f64 {
        match self.branch() {
            Branch::Power => q.powf(-(self.excess() - 1.0) / 2.0),
            Branch::Log => (4.0 / q).ln(),
        }
    }

    fn check_q(q: f64) -> Result<()> {
        if q > 0.0 && q <= 2.0 {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("q must lie in (0, 2], got {q}")))
        }
    }

    /// Inner integral `int_0^1 t^{2gamma-1} ((t+s)^2 + q)^{-eta} dt`, in
    /// `v = ln t` above a head `[0, t_0]` where the second factor is frozen.
    pub fn inner(&self, s: f64, q: f64) -> Result<f64> {
        let scale = (s * s + q).sqrt();
        let t0 = HEAD_FRACTION * scale.min(1.0);
        let g2 = 2.0 * self.gamma;
        let f = |v: f64| {
            let t = v.exp();
            (g2 * v).exp() * ((t + s).powi(2) + q).powf(-self.eta)
        };
        let mut breaks = vec![scale.ln()];
        if s > 0.0 {
            breaks.push(s.ln());
        }
        let r = integrate_with_breaks(f, t0.ln(), 0.0, &breaks, TOL);
        if !r.converged {
            return Err(Error::NonConvergent(format!("inner integral at s={s}, q={q}: error {}", r.abs_error)));
        }
        let head = t0.powf(g2) / g2 * (s * s + q).powf(-self.eta);
        Ok(r.value + head)
    }

    /// `I(q)`, in `w = ln s` above a head `[0, s_0]` where the inner
    /// integral is frozen at `s = 0`.
    pub fn integral(&self, q: f64) -> Result<f64> {
        Self::check_q(q)?;
        let sq = q.sqrt();
        let s0 = HEAD_FRACTION * sq.min(1.0);
        let x1 = self.xi + 1.0;
        let err = std::cell::Cell::new(None);
        let f = |w: f64| {
            let s = w.exp();
            match self.inner(s, q) {
                Ok(g) => (x1 * w).exp() * g.sqrt(),
                Err(e) => {
                    err.set(Some(e));
                    0.0
                }
            }
        };
        let r = integrate_with_breaks(f, s0.ln(), 0.0, &[sq.ln()], TOL);
        if let Some(e) = err.take() {
            return Err(e);
        }
        if !r.converged {
            return Err(Error::NonConvergent(format!("outer integral at q={q}: error {}", r.abs_error)));
        }
        let head = self.inner(0.0, q)?.sqrt() * s0.powf(x1) / x1;
        Ok(r.value + head)
    }
}

/// `q = 1, 0.1, ..., 1e-6`.
pub fn default_q_grid() -> Vec<f64> {
    (0..=6).map(|k| 10f64.powi(-k)).collect()
}

/// Cases covering both branches and the boundary `eta - xi - gamma = 1`.
pub fn default_cases() -> Vec<Lemma36Params> {
    [(3.0, 0.0, 1.0), (2.0, 0.0, 1.0), (2.5, 0.5, 1.0), (1.0, 0.0, 0.5), (1.5, -0.5, 0.75)]
        .iter()
        .map(|&(e, x, g)| Lemma36Params::new(e, x, g).expect("valid"))
        .collect()
}

/// `I(q)/bound(q)` on a decreasing grid of `q`. Passes when every value is
/// finite and the ratio never exceeds [`SPREAD_LIMIT`] times its value at
/// the largest `q`.
pub fn lemma36_check(params: Lemma36Params, q_grid: &[f64]) -> Result<ExperimentReport> {
    if q_grid.is_empty() {
        return Err(Error::InvalidArgument("empty q grid".into()));
    }
    let start = Instant::now();
    let mut qs = q_grid.to_vec();
    qs.sort_by(|a, b| b.total_cmp(a));
    let mut table = Table::new("lemma36", &["q", "integral", "bound", "ratio"]);
    let mut ratios = Vec::with_capacity(qs.len());
    for &q in &qs {
        let i = params.integral(q)?;
        let b = params.bound(q);
        table.push(vec![q, i, b, i / b]);
        ratios.push(i / b);
    }
    let mut report = ExperimentReport::new("lemma36");
    report.s_or_gamma = Some(params.gamma);
    report.samples = qs.len();
    report
        .setting("eta", params.eta)
        .setting("xi", params.xi)
        .setting("gamma", params.gamma)
        .setting("branch", params.branch())
        .setting("q_grid", &qs);
    let finite = ratios.iter().all(|r| r.is_finite() && *r > 0.0);
    let spread = ratios.iter().copied().fold(0.0, f64::max) / ratios[0];
    report.checks.push(Check {
        name: "all_finite".into(),
        value: if finite { 1.0 } else { 0.0 },
        threshold: 1.0,
        pass: finite,
    });
    report.checks.push(Check::below("max_ratio_over_first", spread, SPREAD_LIMIT));
    report.stats = Stats::from_values(&ratios);
    report.ratios = ratios;
    report.tables.push(table);
    report.finish_from_checks();
    report.runtime_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::QuadratureRule;
    use approx::assert_relative_eq;

    /// Plain tensor Gauss-Legendre on `[0,1]^2`, fine for smooth integrands.
    fn tensor(p: &Lemma36Params, q: f64, n: usize) -> f64 {
        let r = QuadratureRule::gauss_legendre(n, 0.0, 1.0).unwrap();
        let (x, w) = (r.nodes(), r.weights());
        let mut total = 0.0;
        for (&s, &ws) in x.iter().zip(w) {
            let inner: f64 = x
                .iter()
                .zip(w)
                .map(|(&t, &wt)| wt * t.powf(2.0 * p.gamma - 1.0) * ((t + s).powi(2) + q).powf(-p.eta))
                .sum();
            total += ws * inner.sqrt() * s.powf(p.xi);
        }
        total
    }

    #[test]
    fn smooth_case_matches_tensor_rule() {
        // gamma = 1 and xi = 0 leave no endpoint singularity.
        let p = Lemma36Params::new(1.7, 0.0, 1.0).unwrap();
        for &q in &[2.0, 0.5] {
            assert_relative_eq!(p.integral(q).unwrap(), tensor(&p, q, 60), max_relative = 1e-10);
        }
    }

    #[test]
    fn closed_form_at_eta_zero() {
        // eta = 0: inner = 1/(2 gamma), I = (2 gamma)^{-1/2} / (xi + 1).
        let p = Lemma36Params::new(0.0, -0.4, 0.3).unwrap();
        let expect = (0.6f64).powf(-0.5) / 0.6;
        assert_relative_eq!(p.integral(1e-4).unwrap(), expect, max_relative = 1e-9);
    }

    #[test]
    fn branch_selection() {
        assert_eq!(Lemma36Params::new(2.0, 0.0, 1.0).unwrap().branch(), Branch::Log);
        assert_eq!(Lemma36Params::new(3.0, 0.0, 1.0).unwrap().branch(), Branch::Power);
        assert!(Lemma36Params::new(1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn boundary_case_bounded() {
        let p = Lemma36Params::new(2.0, 0.0, 1.0).unwrap();
        let r = lemma36_check(p, &default_q_grid()).unwrap();
        assert_eq!(r.pass, Some(true), "{:?}", r.checks);
    }
}
