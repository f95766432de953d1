//! Globally adaptive Gauss–Kronrod (7/15) integration on finite intervals.
//!
//! Used for reference integrals and for the norm certificates of fooling
//! functions. The per-panel error estimate is the raw `|K15 - G7|`
//! difference, which is pessimistic for smooth integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

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
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_panels: usize,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self {
            abs,
            rel,
            max_panels: 20_000,
        }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::new(1e-13, 1e-13)
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

struct Panel {
    lo: f64,
    hi: f64,
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

fn kronrod<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Panel {
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for (i, (&x, &wk)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let pair = f(c - h * x) + f(c + h * x);
        k += wk * pair;
        if i % 2 == 1 {
            g += WG[i / 2] * pair;
        }
    }
    Panel {
        lo,
        hi,
        value: k * h,
        error: ((k - g) * h).abs(),
    }
}

/// Integrates `f` over `[lo, hi]` split at the given interior breakpoints.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    tol: Tolerance,
) -> Result<Estimate> {
    assert!(points.len() >= 2, "need at least one interval");
    let mut heap = BinaryHeap::new();
    for w in points.windows(2) {
        if w[1] > w[0] {
            heap.push(kronrod(&f, w[0], w[1]));
        }
    }
    let (lo, hi) = (points[0], points[points.len() - 1]);
    loop {
        let value: f64 = heap.iter().map(|p| p.value).sum();
        let error: f64 = heap.iter().map(|p| p.error).sum();
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::AdaptiveQuadrature {
                lo,
                hi,
                tol: tol.abs,
                estimate: value,
            });
        }
        if error <= tol.abs.max(tol.rel * value.abs()) {
            return Ok(Estimate {
                value,
                error,
                panels: heap.len(),
            });
        }
        if heap.len() >= tol.max_panels {
            return Err(Error::AdaptiveQuadrature {
                lo,
                hi,
                tol: tol.abs.max(tol.rel * value.abs()),
                estimate: error,
            });
        }
        let worst = heap.pop().expect("non-empty panel heap");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            // panel cannot be split further in floating point
            return Err(Error::AdaptiveQuadrature {
                lo,
                hi,
                tol: tol.abs,
                estimate: error,
            });
        }
        heap.push(kronrod(&f, worst.lo, mid));
        heap.push(kronrod(&f, mid, worst.hi));
    }
}

/// Integrates `f` over `[lo, hi]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: Tolerance) -> Result<Estimate> {
    integrate_with_breaks(f, &[lo, hi], tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let est = integrate(|x| x.powi(6) - 3.0 * x, -1.0, 2.0, Tolerance::default()).unwrap();
        let exact = (2f64.powi(7) + 1.0) / 7.0 - 1.5 * (4.0 - 1.0);
        assert!((est.value - exact).abs() < 1e-13);
    }

    #[test]
    fn gaussian_tail() {
        let est = integrate(|x: f64| (-x * x).exp(), -12.0, 12.0, Tolerance::default()).unwrap();
        assert!((est.value - std::f64::consts::PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn kink_with_breakpoint() {
        let est = integrate_with_breaks(|x: f64| x.abs(), &[-1.0, 0.0, 3.0], Tolerance::default())
            .unwrap();
        assert!((est.value - 5.0).abs() < 1e-14);
        let est = integrate(
            |x: f64| x.abs().sqrt(),
            -1.0,
            1.0,
            Tolerance::new(1e-12, 1e-12),
        )
        .unwrap();
        assert!((est.value - 4.0 / 3.0).abs() < 1e-11);
    }
}
