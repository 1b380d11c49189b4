//! Spectral multipliers: the Poisson semigroup, potentials, fractional
//! powers, the derivative `D` and Riesz transforms.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expansion::Expansion;
use crate::params::ParameterPair;
use crate::report::{Check, ExperimentReport, Table};

type Symbol<'a> = Box<dyn Fn(usize) -> Complex64 + Send + Sync + 'a>;

/// Coefficient map `b_{n + shift} = m(n) a_n`, taking expansions over
/// `source` to expansions over `target`.
pub struct Multiplier<'a> {
    symbol: Symbol<'a>,
    shift: isize,
    source: ParameterPair,
    target: ParameterPair,
}

impl<'a> Multiplier<'a> {
    pub fn new(
        source: ParameterPair,
        target: ParameterPair,
        shift: isize,
        symbol: impl Fn(usize) -> Complex64 + Send + Sync + 'a,
    ) -> Self {
        Self {
            symbol: Box::new(symbol),
            shift,
            source,
            target,
        }
    }

    /// Diagonal multiplier with a real symbol.
    pub fn diagonal(params: ParameterPair, symbol: impl Fn(usize) -> f64 + Send + Sync + 'a) -> Self {
        Self::new(params, params, 0, move |n| Complex64::new(symbol(n), 0.0))
    }

    pub fn symbol(&self, n: usize) -> Complex64 {
        (self.symbol)(n)
    }

    pub fn shift(&self) -> isize {
        self.shift
    }

    pub fn source(&self) -> &ParameterPair {
        &self.source
    }

    pub fn target(&self) -> &ParameterPair {
        &self.target
    }
}

pub fn apply_multiplier(e: &Expansion, m: &Multiplier<'_>) -> Result<Expansion> {
    if e.params() != m.source() {
        return Err(Error::mismatch(*m.source(), *e.params()));
    }
    let len = (e.len() as isize + m.shift()).max(0) as usize;
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for (n, a) in e.coeffs().iter().enumerate() {
        let k = n as isize + m.shift();
        if k < 0 || k as usize >= len {
            continue;
        }
        out[k as usize] = m.symbol(n) * a;
    }
    Expansion::new(*m.target(), out)
}

fn diagonal_map(e: &Expansion, f: impl Fn(usize) -> f64) -> Result<Expansion> {
    let coeffs = e
        .coeffs()
        .iter()
        .enumerate()
        .map(|(n, a)| a * f(n))
        .collect();
    Expansion::new(*e.params(), coeffs)
}

/// `e^{-t sqrt(L)} f`, `t >= 0`.
pub fn poisson(e: &Expansion, t: f64) -> Result<Expansion> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("Poisson time must be >= 0, got {t}")));
    }
    let p = *e.params();
    diagonal_map(e, |n| (-t * p.sqrt_eigenvalue(n)).exp())
}

/// `L^{-sigma} f`; undefined when `lambda_0 = 0`.
pub fn riesz_potential(e: &Expansion, sigma: f64) -> Result<Expansion> {
    let p = *e.params();
    if p.is_singular() {
        return Err(Error::SingularPair {
            alpha: p.alpha(),
            beta: p.beta(),
        });
    }
    diagonal_map(e, |n| p.eigenvalue(n).powf(-sigma))
}

/// `(Id + L)^{-sigma} f`.
pub fn bessel_potential(e: &Expansion, sigma: f64) -> Result<Expansion> {
    let p = *e.params();
    diagonal_map(e, |n| (1.0 + p.eigenvalue(n)).powf(-sigma))
}

/// `(Id + sqrt(L))^{-sigma} f`.
pub fn modified_bessel_potential(e: &Expansion, sigma: f64) -> Result<Expansion> {
    let p = *e.params();
    diagonal_map(e, |n| (1.0 + p.sqrt_eigenvalue(n)).powf(-sigma))
}

/// `L^{sigma} f` for `sigma >= 0`; `lambda_0^sigma = 0` when singular.
pub fn laplacian_power(e: &Expansion, sigma: f64) -> Result<Expansion> {
    if sigma < 0.0 {
        return riesz_potential(e, -sigma);
    }
    let p = *e.params();
    diagonal_map(e, |n| p.eigenvalue(n).powf(sigma))
}

/// The three families of potentials, indexed by smoothness `s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    /// `L^{-s/2}`.
    Riesz,
    /// `(Id + L)^{-s/2}`.
    Bessel,
    /// `(Id + sqrt(L))^{-s}`.
    Modified,
}

impl PotentialKind {
    /// Symbol of the order-`s` potential at `n`.
    pub fn symbol(&self, params: &ParameterPair, n: usize, s: f64) -> f64 {
        match self {
            PotentialKind::Riesz => params.eigenvalue(n).powf(-s / 2.0),
            PotentialKind::Bessel => (1.0 + params.eigenvalue(n)).powf(-s / 2.0),
            PotentialKind::Modified => (1.0 + params.sqrt_eigenvalue(n)).powf(-s),
        }
    }

    pub fn check(&self, params: &ParameterPair) -> Result<()> {
        if *self == PotentialKind::Riesz && params.is_singular() {
            return Err(Error::SingularPair {
                alpha: params.alpha(),
                beta: params.beta(),
            });
        }
        Ok(())
    }

    /// Applies the potential (`inverse = false`) or its inverse.
    pub fn apply(&self, e: &Expansion, s: f64, inverse: bool) -> Result<Expansion> {
        self.check(e.params())?;
        let p = *e.params();
        let sign = if inverse { -1.0 } else { 1.0 };
        diagonal_map(e, |n| self.symbol(&p, n, sign * s))
    }
}

/// `D f` with `D phi_n = -sqrt(lambda_n - lambda_0) phi_{n-1}^{alpha+1,beta+1}`.
pub fn derivative_d(e: &Expansion) -> Result<Expansion> {
    let p = *e.params();
    let m = Multiplier::new(p, p.shifted(1), -1, move |n| {
        Complex64::new(-p.eigenvalue_gap(n).sqrt(), 0.0)
    });
    apply_multiplier(e, &m)
}

/// `D^{(k)} = D_{k-1} ... D_0`, landing in `(alpha + k, beta + k)`.
pub fn higher_derivative(e: &Expansion, k: usize) -> Result<Expansion> {
    let mut cur = e.clone();
    for _ in 0..k {
        cur = derivative_d(&cur)?;
    }
    Ok(cur)
}

/// Order-`k` Riesz transform: `D^{(k)} L^{-k/2}`, with `(Id + L)^{-k/2}` in
/// place of `L^{-k/2}` when the pair is singular.
pub fn riesz_transform(e: &Expansion, k: usize) -> Result<Expansion> {
    let pre = if e.params().is_singular() {
        bessel_potential(e, k as f64 / 2.0)?
    } else {
        riesz_potential(e, k as f64 / 2.0)?
    };
    higher_derivative(&pre, k)
}

/// `||P_t f||_2` for each `t`, with the contraction excess and the
/// semigroup defect `||P_{t/2} P_{t/2} f - P_t f|| / ||f||`.
pub fn poisson_experiment(e: &Expansion, ts: &[f64]) -> Result<ExperimentReport> {
    let start = std::time::Instant::now();
    let norm = e.l2_norm().max(f64::MIN_POSITIVE);
    let mut table = Table::new("poisson", &["t", "l2_norm", "semigroup_defect"]);
    let (mut excess, mut defect) = (0.0f64, 0.0f64);
    for &t in ts {
        let full = poisson(e, t)?;
        let half = poisson(&poisson(e, t / 2.0)?, t / 2.0)?;
        let d = full
            .coeffs()
            .iter()
            .zip(half.coeffs())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
            / norm;
        table.push(vec![t, full.l2_norm(), d]);
        excess = excess.max(full.l2_norm() / norm - 1.0);
        defect = defect.max(d);
    }
    let mut r = ExperimentReport::new("poisson");
    r.params = Some(*e.params());
    r.setting("times", ts).setting("modes", e.len());
    r.checks.push(Check::at_most("contraction_excess", excess, 1e-15));
    r.checks.push(Check::at_most("semigroup_defect", defect, 1e-14));
    r.tables.push(table);
    r.finish_from_checks();
    r.runtime_ms = start.elapsed().as_millis() as u64;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jacobi::phi;
    use approx::assert_relative_eq;

    #[test]
    fn semigroup_law() {
        let p = ParameterPair::new(0.2, -0.4).unwrap();
        let e = crate::ExpansionSampler::default().sample(&p, 3, 0);
        let a = poisson(&poisson(&e, 0.3).unwrap(), 0.5).unwrap();
        let b = poisson(&e, 0.8).unwrap();
        for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
            assert!((x - y).norm() <= 1e-14 * y.norm());
        }
        assert!(poisson(&e, -1.0).is_err());
    }

    #[test]
    fn singular_riesz_rejected() {
        let e = Expansion::basis(ParameterPair::chebyshev(), 2);
        assert!(matches!(riesz_potential(&e, 0.5), Err(Error::SingularPair { .. })));
        assert!(bessel_potential(&e, 0.5).is_ok());
    }

    #[test]
    fn derivative_matches_pointwise_derivative() {
        // For the cosine system D is plain d/dtheta.
        let p = ParameterPair::chebyshev();
        let e = Expansion::basis(p, 3);
        let d = derivative_d(&e).unwrap();
        assert_eq!(d.params(), &p.shifted(1));
        let theta = 0.9;
        let h = 1e-6;
        let fd = (phi(3, &p, theta + h).unwrap() - phi(3, &p, theta - h).unwrap()) / (2.0 * h);
        assert_relative_eq!(d.synthesize(theta).unwrap().re, fd, epsilon = 1e-7);
    }

    #[test]
    fn cosine_riesz_symbol() {
        let p = ParameterPair::chebyshev();
        for n in 0..6 {
            let r = riesz_transform(&Expansion::basis(p, n), 1).unwrap();
            let expect = -(n as f64) / (1.0 + (n * n) as f64).sqrt();
            let got = if n == 0 { 0.0 } else { r.coeffs()[n - 1].re };
            assert_relative_eq!(got, expect, epsilon = 1e-15);
        }
    }

    #[test]
    fn mismatch_rejected() {
        let p = ParameterPair::new(0.0, 0.0).unwrap();
        let e = Expansion::basis(p, 2);
        let m = Multiplier::diagonal(ParameterPair::chebyshev(), |_| 1.0);
        assert!(matches!(apply_multiplier(&e, &m), Err(Error::ParameterMismatch { .. })));
    }

    #[test]
    fn poisson_report_contracts() {
        let p = ParameterPair::new(0.2, -0.4).unwrap();
        let e = crate::ExpansionSampler::default().sample(&p, 5, 0);
        let r = poisson_experiment(&e, &[0.0, 0.1, 1.0, 4.0]).unwrap();
        assert_eq!(r.pass, Some(true));
        let norms: Vec<f64> = r.tables[0].rows.iter().map(|row| row[1]).collect();
        assert!(norms.windows(2).all(|w| w[1] <= w[0]));
        assert_relative_eq!(norms[0], e.l2_norm(), max_relative = 1e-15);
    }
}
