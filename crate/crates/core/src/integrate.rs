//! Globally adaptive Gauss-Kronrod (7/15) integration on finite intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights at XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub intervals: usize,
    pub converged: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs: 1e-14,
            rel: 1e-11,
            max_intervals: 4000,
        }
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Integrates `f` over `[a, b]`, splitting first at the given breakpoints.
pub fn integrate_with_breaks(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: Tolerance,
) -> Integral {
    let mut cuts = vec![a];
    cuts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);

    let mut heap = BinaryHeap::new();
    let (mut total, mut err) = (0.0, 0.0);
    for w in cuts.windows(2) {
        let (v, e) = gk15(&mut f, w[0], w[1]);
        total += v;
        err += e;
        heap.push(Panel {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
        });
    }
    while err > tol.abs.max(tol.rel * total.abs()) && heap.len() < tol.max_intervals {
        let worst = heap.pop().expect("non-empty");
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a || m >= worst.b {
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(&mut f, worst.a, m);
        let (v2, e2) = gk15(&mut f, m, worst.b);
        total += v1 + v2 - worst.value;
        err += e1 + e2 - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: m,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: m,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // Re-sum to shed accumulated rounding from the running updates.
    let (value, abs_error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
    Integral {
        value,
        abs_error,
        intervals: heap.len(),
        converged: abs_error <= tol.abs.max(tol.rel * value.abs()),
    }
}

pub fn integrate(f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: Tolerance) -> Integral {
    integrate_with_breaks(f, a, b, &[], tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn smooth() {
        let r = integrate(|x| x.exp(), 0.0, 2.0, Tolerance::default());
        assert!(r.converged);
        assert_relative_eq!(r.value, 2f64.exp() - 1.0, max_relative = 1e-13);
    }

    #[test]
    fn endpoint_singularity() {
        let r = integrate(|x: f64| x.powf(-0.5), 0.0, 1.0, Tolerance::default());
        assert!(r.converged);
        assert_relative_eq!(r.value, 2.0, max_relative = 1e-10);
    }

    #[test]
    fn kink_with_breakpoint() {
        let r = integrate_with_breaks(|x: f64| (x - 0.3).abs(), 0.0, 1.0, &[0.3], Tolerance::default());
        assert_relative_eq!(r.value, 0.045 + 0.245, max_relative = 1e-14);
    }
}
