//! The parameter pair `(alpha, beta)` and the exponent interval it induces.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// Jacobi parameters `alpha, beta > -1`.
///
/// The pair is immutable after construction. Whether it is singular
/// (`alpha + beta == -1`, bottom eigenvalue zero) is decided by exact
/// equality on the stored reals, so configurations must state such pairs
/// exactly, e.g. `(-0.5, -0.5)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPair", into = "RawPair")]
pub struct ParameterPair {
    alpha: f64,
    beta: f64,
}

#[derive(Serialize, Deserialize)]
struct RawPair {
    alpha: f64,
    beta: f64,
}

impl TryFrom<RawPair> for ParameterPair {
    type Error = Error;
    fn try_from(raw: RawPair) -> Result<Self> {
        ParameterPair::new(raw.alpha, raw.beta)
    }
}

impl From<ParameterPair> for RawPair {
    fn from(p: ParameterPair) -> Self {
        RawPair {
            alpha: p.alpha,
            beta: p.beta,
        }
    }
}

impl ParameterPair {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        // NaN fails both comparisons.
        if !(alpha > -1.0 && beta > -1.0) || !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::InvalidParameters { alpha, beta });
        }
        Ok(Self { alpha, beta })
    }

    /// The cosine system `alpha = beta = -1/2`.
    pub fn chebyshev() -> Self {
        Self {
            alpha: -0.5,
            beta: -0.5,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `A = (alpha + beta + 1) / 2`.
    pub fn a(&self) -> f64 {
        (self.alpha + self.beta + 1.0) / 2.0
    }

    pub fn is_singular(&self) -> bool {
        self.alpha + self.beta == -1.0
    }

    /// True when `alpha + beta` is an integer, which makes every eigenvalue
    /// gap `lambda_n - lambda_m` an integer.
    pub fn has_integer_sum(&self) -> bool {
        let s = self.alpha + self.beta;
        s.fract() == 0.0
    }

    /// `(alpha + k, beta + k)`.
    pub fn shifted(&self, k: usize) -> Self {
        Self {
            alpha: self.alpha + k as f64,
            beta: self.beta + k as f64,
        }
    }

    /// `lambda_n = (n + A)^2`.
    pub fn eigenvalue(&self, n: usize) -> f64 {
        let r = n as f64 + self.a();
        r * r
    }

    /// `sqrt(lambda_n) = |n + A|`.
    pub fn sqrt_eigenvalue(&self, n: usize) -> f64 {
        (n as f64 + self.a()).abs()
    }

    /// `lambda_n - lambda_0 = n (n + alpha + beta + 1)`, computed without
    /// cancellation.
    pub fn eigenvalue_gap(&self, n: usize) -> f64 {
        let n = n as f64;
        n * (n + self.alpha + self.beta + 1.0)
    }

    pub fn exponent_range(&self) -> ExponentRange {
        ExponentRange::for_pair(self)
    }

    /// `1/2 + max(alpha, beta, -1/2)`, the growth exponent of `phi_n`.
    pub fn growth_exponent(&self) -> f64 {
        0.5 + self.alpha.max(self.beta).max(-0.5)
    }
}

impl fmt::Display for ParameterPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.alpha, self.beta)
    }
}

/// The open interval `E(alpha, beta) = (p'(alpha,beta), p(alpha,beta))` of
/// admissible Lebesgue exponents.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExponentRange {
    pub lower: f64,
    pub upper: f64,
}

impl ExponentRange {
    pub fn for_pair(params: &ParameterPair) -> Self {
        let (a, b) = (params.alpha(), params.beta());
        let upper = if a >= -0.5 && b >= -0.5 {
            f64::INFINITY
        } else {
            -1.0 / (a + 0.5).min(b + 0.5)
        };
        Self {
            lower: conjugate_exponent(upper),
            upper,
        }
    }

    /// Strict membership `lower < p < upper`.
    pub fn contains(&self, p: f64) -> bool {
        p > self.lower && p < self.upper
    }

    pub fn check(&self, p: f64) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::ExponentOutsidePencil {
                p,
                lower: self.lower,
                upper: self.upper,
            })
        }
    }
}

/// `p' = p / (p - 1)`, with `1 <-> infinity`.
pub fn conjugate_exponent(p: f64) -> f64 {
    if p.is_infinite() {
        1.0
    } else if p == 1.0 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range() {
        assert!(ParameterPair::new(-1.0, 0.0).is_err());
        assert!(ParameterPair::new(0.0, -1.5).is_err());
        assert!(ParameterPair::new(f64::NAN, 0.0).is_err());
        assert!(ParameterPair::new(-0.999, 3.0).is_ok());
    }

    #[test]
    fn derived_fields() {
        let p = ParameterPair::new(-0.5, -0.5).unwrap();
        assert_eq!(p.a(), 0.0);
        assert!(p.is_singular());
        assert_eq!(p.eigenvalue(0), 0.0);
        assert_eq!(p.eigenvalue(3), 9.0);
        let q = ParameterPair::new(0.0, 0.0).unwrap();
        assert_eq!(q.a(), 0.5);
        assert!(!q.is_singular());
        assert_eq!(q.eigenvalue(2), 6.25);
        assert_eq!(q.eigenvalue_gap(2), q.eigenvalue(2) - q.eigenvalue(0));
    }

    #[test]
    fn pencil() {
        let e = ParameterPair::new(0.0, 0.0).unwrap().exponent_range();
        assert_eq!(e.upper, f64::INFINITY);
        assert_eq!(e.lower, 1.0);
        let e = ParameterPair::new(-0.75, 1.0 / 3.0).unwrap().exponent_range();
        assert!((e.upper - 4.0).abs() < 1e-15);
        assert!((1.0 / e.lower + 1.0 / e.upper - 1.0).abs() < 1e-15);
        assert!(e.contains(2.0) && !e.contains(4.0) && !e.contains(4.0 / 3.0));
    }

    #[test]
    fn serde_validates() {
        let ok: ParameterPair = serde_json::from_str(r#"{"alpha":0.5,"beta":-0.25}"#).unwrap();
        assert_eq!(ok.alpha(), 0.5);
        let bad: std::result::Result<ParameterPair, _> =
            serde_json::from_str(r#"{"alpha":-2.0,"beta":0.0}"#);
        assert!(bad.is_err());
    }
}
