//! Library routines against independently derived values.

use num_complex::Complex64;
use statrs::function::gamma::{gamma as gamma_fn, ln_gamma};
use std::f64::consts::PI;

use jacobi_spectral::fractional::{caputo_poisson, square_function_on};
use jacobi_spectral::integrate::{integrate, integrate_with_breaks, Tolerance};
use jacobi_spectral::jacobi::phi;
use jacobi_spectral::{Execution, Expansion, ParameterPair, SquareFunction};

fn pair(a: f64, b: f64) -> ParameterPair {
    ParameterPair::new(a, b).unwrap()
}

/// `Gamma(x + 1) / (Gamma(k + 1) Gamma(x - k + 1))` for real `x`.
fn binom(x: f64, k: usize) -> f64 {
    (0..k).map(|j| (x - j as f64) / (j as f64 + 1.0)).product()
}

/// Jacobi polynomial from its explicit finite sum.
fn jacobi_sum(n: usize, a: f64, b: f64, x: f64) -> f64 {
    (0..=n)
        .map(|k| binom(n as f64 + a, n - k) * binom(n as f64 + b, k) * ((x - 1.0) / 2.0).powi(k as i32) * ((x + 1.0) / 2.0).powi((n - k) as i32))
        .sum()
}

/// `int_{-1}^1 P_n^2 (1-x)^a (1+x)^b dx`.
fn jacobi_norm_sq(n: usize, a: f64, b: f64) -> f64 {
    let nf = n as f64;
    let log = (a + b + 1.0) * 2f64.ln() + ln_gamma(nf + a + 1.0) + ln_gamma(nf + b + 1.0)
        - ln_gamma(nf + a + b + 2.0)
        - ln_gamma(nf + 1.0);
    // (n + a + b + 1) / (2n + a + b + 1), which tends to 1 at n = 0, a + b = -1.
    let ratio = if n == 0 { 1.0 } else { (nf + a + b + 1.0) / (2.0 * nf + a + b + 1.0) };
    log.exp() * ratio
}

/// `phi_n` from the explicit sum, with `x = cos theta`.
fn phi_oracle(n: usize, a: f64, b: f64, theta: f64) -> f64 {
    let psi = (theta / 2.0).sin().powf(a + 0.5) * (theta / 2.0).cos().powf(b + 0.5);
    let scale = (2f64.powf(a + b + 1.0) / jacobi_norm_sq(n, a, b)).sqrt();
    psi * scale * jacobi_sum(n, a, b, theta.cos())
}

const PAIRS: [(f64, f64); 5] = [(0.0, 0.0), (-0.5, -0.5), (1.0, 0.5), (0.3, -0.4), (-0.7, 1.8)];

#[test]
fn basis_matches_explicit_sum() {
    for &(a, b) in &PAIRS {
        let p = pair(a, b);
        for n in 0..=12 {
            let thetas: Vec<f64> = (1..40).map(|j| j as f64 * PI / 40.0).collect();
            let lib: Vec<f64> = thetas.iter().map(|&t| phi(n as i64, &p, t).unwrap()).collect();
            let orc: Vec<f64> = thetas.iter().map(|&t| phi_oracle(n, a, b, t)).collect();
            let scale = orc.iter().fold(0f64, |m, v| m.max(v.abs()));
            let same = lib.iter().zip(&orc).fold(0f64, |m, (x, y)| m.max((x - y).abs()));
            let flip = lib.iter().zip(&orc).fold(0f64, |m, (x, y)| m.max((x + y).abs()));
            assert!(same.min(flip) <= 1e-11 * scale, "({a},{b}) n={n}: {same:e} {flip:e}");
        }
    }
}

#[test]
fn orthonormal_under_adaptive_integration() {
    let tol = Tolerance {
        abs: 1e-14,
        rel: 1e-12,
        max_intervals: 4000,
    };
    // Pairs with a, b >= -1/2 keep the integrand bounded.
    for &(a, b) in &PAIRS[..3] {
        let p = pair(a, b);
        for i in 0..=10i64 {
            for j in i..=10 {
                let v = integrate(|t| phi(i, &p, t).unwrap() * phi(j, &p, t).unwrap(), 1e-300, PI - 1e-15, tol).value;
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((v - want).abs() <= 1e-10, "({a},{b}) <{i},{j}> = {v}");
            }
        }
    }
}

#[test]
fn cosine_and_sine_cases_are_trigonometric() {
    let cheb = pair(-0.5, -0.5);
    let second = pair(0.5, 0.5);
    for n in 0..30i64 {
        for j in 1..200 {
            let t = j as f64 * PI / 200.0;
            let c = if n == 0 { 1.0 / PI.sqrt() } else { (2.0 / PI).sqrt() * (n as f64 * t).cos() };
            let s = (2.0 / PI).sqrt() * ((n + 1) as f64 * t).sin();
            assert!((phi(n, &cheb, t).unwrap() - c).abs() <= 1e-12);
            assert!((phi(n, &second, t).unwrap() - s).abs() <= 1e-12);
        }
    }
}

#[test]
fn caputo_of_single_mode_is_power_of_rate() {
    for &(a, b) in &PAIRS {
        let p = pair(a, b);
        for n in [1usize, 4, 9] {
            let rate = n as f64 + (a + b + 1.0) / 2.0;
            let e = Expansion::basis(p, n);
            for gamma in [0.3f64, 1.0, 1.7, 2.5] {
                let m = gamma.floor() as i32 + 1;
                for (t, theta) in [(0.2, 0.7), (1.5, 2.9)] {
                    let want = (-1f64).powi(m) * rate.powf(gamma) * (-t * rate).exp() * phi_oracle(n, a, b, theta);
                    let got = caputo_poisson(&e, gamma, t, theta).unwrap();
                    let sign = if (got.re - want).abs() <= (got.re + want).abs() { 1.0 } else { -1.0 };
                    assert!(
                        (got - Complex64::new(sign * want, 0.0)).norm() <= 1e-12 * want.abs().max(1e-300),
                        "({a},{b}) n={n} gamma={gamma}: {got} vs {want}"
                    );
                }
            }
        }
    }
}

/// `(int_0^infty t^{2 gamma - 1} |sum_n a_n r_n^gamma e^{-t r_n} phi_n|^2 dt)^{1/2}`
/// by adaptive quadrature in `u = t^{2 gamma}` near zero.
fn g_oracle(p: &ParameterPair, coeffs: &[(usize, f64)], gamma: f64, theta: f64) -> f64 {
    let (a, b) = (p.alpha(), p.beta());
    let terms: Vec<(f64, f64)> = coeffs
        .iter()
        .map(|&(n, c)| {
            let r = n as f64 + (a + b + 1.0) / 2.0;
            (r, c * r.powf(gamma) * phi_oracle(n, a, b, theta))
        })
        .collect();
    let f = |t: f64| terms.iter().map(|(r, h)| h * (-t * r).exp()).sum::<f64>();
    let tol = Tolerance {
        abs: 0.0,
        rel: 1e-13,
        max_intervals: 4000,
    };
    let head = integrate(|u: f64| f(u.powf(0.5 / gamma)).powi(2), 0.0, 1.0, tol).value / (2.0 * gamma);
    let tail = integrate_with_breaks(|t: f64| t.powf(2.0 * gamma - 1.0) * f(t).powi(2), 1.0, 80.0, &[2.0, 5.0, 10.0, 20.0], tol).value;
    (head + tail).sqrt()
}

#[test]
fn square_function_matches_direct_time_integral() {
    for &(a, b) in &PAIRS {
        let p = pair(a, b);
        let coeffs = [(1usize, 0.8), (2, -0.35), (5, 0.2), (7, 0.05)];
        let mut dense = vec![Complex64::new(0.0, 0.0); 8];
        for &(n, c) in &coeffs {
            dense[n] = Complex64::new(c, 0.0);
        }
        let e = Expansion::new(p, dense).unwrap();
        let thetas = [0.4, 1.3, 2.2, 3.0];
        for gamma in [0.25, 1.0, 3.5] {
            let lib = square_function_on(SquareFunction::Fractional { gamma }, &e, &thetas, Execution::Sequential).unwrap();
            for (&theta, &g) in thetas.iter().zip(&lib) {
                let want = g_oracle(&p, &coeffs, gamma, theta);
                assert!((g - want).abs() <= 1e-8 * want, "({a},{b}) gamma={gamma} theta={theta}: {g} vs {want}");
            }
            // Single mode: g = sqrt(Gamma(2 gamma) / 4^gamma) |phi_n|.
            let one = Expansion::basis(p, 3);
            let g1 = square_function_on(SquareFunction::Fractional { gamma }, &one, &[1.1], Execution::Sequential).unwrap()[0];
            let want = (gamma_fn(2.0 * gamma) / 4f64.powf(gamma)).sqrt() * phi_oracle(3, a, b, 1.1).abs();
            assert!((g1 - want).abs() <= 1e-10 * want, "single mode ({a},{b}) gamma={gamma}");
        }
    }
}
