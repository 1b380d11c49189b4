//! Finite `phi_n`-expansions and their JSON form.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{integrate_with_breaks, Tolerance};
use crate::jacobi::{phi_all, PhiEvaluator};
use crate::params::ParameterPair;
use crate::quadrature::{Measure, QuadratureRule};
use crate::report::{Check, ExperimentReport, Table};

/// `f = sum_n a_n phi_n^{alpha,beta}` with finitely many coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ExpansionRecord", into = "ExpansionRecord")]
pub struct Expansion {
    params: ParameterPair,
    coeffs: Vec<Complex64>,
}

/// On-disk layout: `{"alpha", "beta", "coeffs": [{"re", "im"}, ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExpansionRecord {
    pub alpha: f64,
    pub beta: f64,
    pub coeffs: Vec<ComplexRecord>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ComplexRecord {
    pub re: f64,
    pub im: f64,
}

impl TryFrom<ExpansionRecord> for Expansion {
    type Error = Error;
    fn try_from(r: ExpansionRecord) -> Result<Self> {
        let params = ParameterPair::new(r.alpha, r.beta)?;
        Expansion::new(
            params,
            r.coeffs.iter().map(|c| Complex64::new(c.re, c.im)).collect(),
        )
    }
}

impl From<Expansion> for ExpansionRecord {
    fn from(e: Expansion) -> Self {
        ExpansionRecord {
            alpha: e.params.alpha(),
            beta: e.params.beta(),
            coeffs: e
                .coeffs
                .iter()
                .map(|c| ComplexRecord { re: c.re, im: c.im })
                .collect(),
        }
    }
}

impl Expansion {
    pub fn new(params: ParameterPair, coeffs: Vec<Complex64>) -> Result<Self> {
        if let Some(i) = coeffs.iter().position(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { params, coeffs })
    }

    pub fn from_real(params: ParameterPair, coeffs: &[f64]) -> Result<Self> {
        Self::new(params, coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zero(params: ParameterPair, len: usize) -> Self {
        Self {
            params,
            coeffs: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    /// The single mode `phi_n`.
    pub fn basis(params: ParameterPair, n: usize) -> Self {
        let mut e = Self::zero(params, n + 1);
        e.coeffs[n] = Complex64::new(1.0, 0.0);
        e
    }

    pub(crate) fn from_parts(params: ParameterPair, coeffs: Vec<Complex64>) -> Self {
        Self { params, coeffs }
    }

    pub fn params(&self) -> &ParameterPair {
        &self.params
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `||f||_{L^2(d theta)}`, which is the `l^2` norm of the coefficients.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn synthesize(&self, theta: f64) -> Result<Complex64> {
        let v = phi_all(&self.params, self.len(), theta)?;
        Ok(self.coeffs.iter().zip(&v).map(|(c, &p)| c * p).sum())
    }

    /// Values at many nodes (not range-checked).
    pub fn synthesize_on(&self, nodes: &[f64]) -> Vec<Complex64> {
        let ev = PhiEvaluator::new(&self.params, self.len());
        let mut row = vec![0.0; self.len()];
        nodes
            .iter()
            .map(|&t| {
                ev.phi_into(t, &mut row);
                self.coeffs.iter().zip(&row).map(|(c, &p)| c * p).sum()
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("expansion serializes")
    }

    pub fn from_json(s: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// Coefficients `a_n = int f phi_n d theta` for `n < len` by quadrature.
///
/// Exact for `f` in the span of `phi_0..phi_{len-1}` when `rule` is the
/// Gauss rule of the same pair with at least `len` nodes.
pub fn fourier_coeffs(
    f: impl Fn(f64) -> Complex64,
    len: usize,
    params: &ParameterPair,
    rule: &QuadratureRule,
) -> Result<Expansion> {
    if rule.len() < len {
        return Err(Error::ResolutionMismatch {
            nodes: rule.len(),
            modes: len,
        });
    }
    let ev = PhiEvaluator::new(params, len);
    let mut row = vec![0.0; len];
    let mut acc = vec![Complex64::new(0.0, 0.0); len];
    for (&t, &w) in rule.nodes().iter().zip(rule.theta_weights()) {
        let fv = f(t) * w;
        ev.phi_into(t, &mut row);
        for (a, &p) in acc.iter_mut().zip(&row) {
            *a += fv * p;
        }
    }
    Expansion::new(*params, acc)
}

/// Random expansions `a_n = zeta_n (n+1)^{-decay}` with `zeta_n` standard
/// complex Gaussian.
///
/// Sample `i` of seed `s` is drawn from its own ChaCha stream, so the
/// sequence is reproducible and independent of evaluation order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionSampler {
    pub modes: usize,
    pub decay: f64,
}

impl Default for ExpansionSampler {
    fn default() -> Self {
        Self {
            modes: 32,
            decay: 1.5,
        }
    }
}

impl ExpansionSampler {
    pub fn sample(&self, params: &ParameterPair, seed: u64, index: u64) -> Expansion {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let scale = std::f64::consts::FRAC_1_SQRT_2;
        let coeffs = (0..self.modes)
            .map(|n| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im) * (scale * ((n + 1) as f64).powf(-self.decay))
            })
            .collect();
        Expansion::from_parts(*params, coeffs)
    }
}

/// Named test functions on `(0, pi)` for [`expand_experiment`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionPreset {
    /// `theta (pi - theta)`.
    Parabola,
    /// `exp(-4 (theta - pi/2)^2)`.
    Bump,
    /// `1` on `(0, pi/2)`, `-1` on `(pi/2, pi)`.
    Step,
}

impl FunctionPreset {
    pub fn eval(&self, theta: f64) -> f64 {
        use std::f64::consts::FRAC_PI_2;
        match self {
            FunctionPreset::Parabola => theta * (std::f64::consts::PI - theta),
            FunctionPreset::Bump => (-4.0 * (theta - FRAC_PI_2).powi(2)).exp(),
            FunctionPreset::Step => {
                if theta < FRAC_PI_2 {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }
}

impl std::str::FromStr for FunctionPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "parabola" => Ok(FunctionPreset::Parabola),
            "bump" => Ok(FunctionPreset::Bump),
            "step" => Ok(FunctionPreset::Step),
            other => Err(Error::InvalidArgument(format!(
                "unknown preset '{other}', expected parabola, bump or step"
            ))),
        }
    }
}

/// Expands a preset in `phi_0..phi_{len-1}` by adaptive quadrature of each
/// coefficient, then checks that synthesis followed by Gauss analysis
/// returns the same coefficients. Also records the energy
/// `||f||^2 - sum |a_n|^2` left in the tail.
pub fn expand_experiment(params: &ParameterPair, preset: FunctionPreset, len: usize) -> Result<ExperimentReport> {
    if len == 0 {
        return Err(Error::InvalidArgument("need at least one mode".into()));
    }
    let start = std::time::Instant::now();
    // Coefficients that vanish by symmetry only meet the absolute target.
    let tol = Tolerance {
        abs: 1e-13,
        ..Tolerance::default()
    };
    let breaks = [std::f64::consts::FRAC_PI_2];
    let pi = std::f64::consts::PI;
    let ev = PhiEvaluator::new(params, len);
    let mut row = vec![0.0; len];
    let mut coeffs = Vec::with_capacity(len);
    for n in 0..len {
        let r = integrate_with_breaks(
            |t| {
                ev.phi_into(t, &mut row[..=n]);
                preset.eval(t) * row[n]
            },
            0.0,
            pi,
            &breaks,
            tol,
        );
        if !r.converged {
            return Err(Error::NonConvergent(format!("coefficient {n}: error {}", r.abs_error)));
        }
        coeffs.push(Complex64::new(r.value, 0.0));
    }
    let e = Expansion::new(*params, coeffs)?;

    let exact = QuadratureRule::gauss_jacobi(len, params, Measure::Lebesgue)?;
    let back = fourier_coeffs(|t| e.synthesize(t).unwrap_or_default(), len, params, &exact)?;
    let roundtrip = e
        .coeffs()
        .iter()
        .zip(back.coeffs())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);

    let energy = integrate_with_breaks(|t| preset.eval(t).powi(2), 0.0, pi, &breaks, tol);
    let tail = energy.value - e.l2_norm().powi(2);

    let mut table = Table::new("coefficients", &["n", "re", "im"]);
    for (n, a) in e.coeffs().iter().enumerate() {
        table.push(vec![n as f64, a.re, a.im]);
    }
    let mut r = ExperimentReport::new("expand");
    r.params = Some(*params);
    r.setting("preset", preset)
        .setting("modes", len)
        .setting("tail_energy", tail);
    r.checks.push(Check::at_most("roundtrip_max_abs_err", roundtrip, 1e-12));
    r.checks.push(Check::at_most("negative_tail_energy", -tail, 1e-10));
    r.tables.push(table);
    r.finish_from_checks();
    r.runtime_ms = start.elapsed().as_millis() as u64;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::Measure;
    use approx::assert_relative_eq;

    #[test]
    fn json_roundtrip() {
        let p = ParameterPair::new(0.25, -0.5).unwrap();
        let e = ExpansionSampler::default().sample(&p, 7, 3);
        let back = Expansion::from_json(&e.to_json()).unwrap();
        assert_eq!(e, back);
        let bad = r#"{"alpha":-1.5,"beta":0.0,"coeffs":[]}"#;
        assert!(Expansion::from_json(bad).is_err());
    }

    #[test]
    fn coefficients_roundtrip() {
        let p = ParameterPair::new(-0.3, 0.4).unwrap();
        let e = ExpansionSampler { modes: 12, decay: 1.0 }.sample(&p, 1, 0);
        let rule = QuadratureRule::gauss_jacobi(12, &p, Measure::Lebesgue).unwrap();
        let back = fourier_coeffs(|t| e.synthesize(t).unwrap(), 12, &p, &rule).unwrap();
        for (a, b) in e.coeffs().iter().zip(back.coeffs()) {
            assert!((a - b).norm() < 1e-13);
        }
        let small = QuadratureRule::gauss_jacobi(8, &p, Measure::Lebesgue).unwrap();
        assert!(fourier_coeffs(|_| Complex64::new(1.0, 0.0), 12, &p, &small).is_err());
    }

    #[test]
    fn sampler_is_deterministic() {
        let p = ParameterPair::new(0.0, 0.0).unwrap();
        let s = ExpansionSampler::default();
        assert_eq!(s.sample(&p, 42, 5), s.sample(&p, 42, 5));
        assert_ne!(s.sample(&p, 42, 5), s.sample(&p, 42, 6));
        assert_relative_eq!(s.sample(&p, 1, 1).len() as f64, 32.0);
    }

    #[test]
    fn parabola_expansion() {
        let p = ParameterPair::new(0.0, 0.0).unwrap();
        let r = expand_experiment(&p, FunctionPreset::Parabola, 32).unwrap();
        assert_eq!(r.pass, Some(true), "{:?}", r.checks);
        let tail = r.settings["tail_energy"].as_f64().unwrap();
        assert!((0.0..1e-4).contains(&tail), "tail {tail}");
        assert!("wave".parse::<FunctionPreset>().is_err());
    }

    #[test]
    fn cosine_coefficients_of_parabola() {
        // int_0^pi theta (pi - theta) sqrt(2/pi) cos(2 theta) d theta = -sqrt(2/pi) pi / 2.
        let r = expand_experiment(&ParameterPair::chebyshev(), FunctionPreset::Parabola, 8).unwrap();
        let a2 = r.tables[0].rows[2][1];
        assert_relative_eq!(a2, -(2.0 / std::f64::consts::PI).sqrt() * std::f64::consts::PI / 2.0, max_relative = 1e-12);
        assert!(r.tables[0].rows[3][1].abs() < 1e-13);
    }
}
