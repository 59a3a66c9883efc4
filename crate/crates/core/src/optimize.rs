//! One-dimensional search helpers.

use crate::error::{Error, Result};

/// Golden ratio conjugate, `(sqrt(5) - 1) / 2`.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
pub fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iterations: usize) -> Maximum {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iterations {
        if !(x1 < x2) {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        Maximum { x: x1, value: f1 }
    } else {
        Maximum { x: x2, value: f2 }
    }
}

/// Uniform scan with `scan_points` samples to bracket the global maximum,
/// then golden-section refinement inside the bracketing cell pair.
pub fn scan_then_golden_max(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    scan_points: usize,
    iterations: usize,
) -> Result<Maximum> {
    if !(lo < hi) || scan_points < 3 {
        return Err(Error::Optimization(format!("bad search interval [{lo}, {hi}]")));
    }
    let step = (hi - lo) / (scan_points - 1) as f64;
    let mut best = (0usize, f64::NEG_INFINITY);
    for i in 0..scan_points {
        let v = f(lo + step * i as f64);
        if v.is_finite() && v > best.1 {
            best = (i, v);
        }
    }
    if !best.1.is_finite() {
        return Err(Error::Optimization("objective is not finite anywhere on the scan".into()));
    }
    let a = lo + step * best.0.saturating_sub(1) as f64;
    let b = (lo + step * (best.0 + 1) as f64).min(hi);
    let refined = golden_section_max(&f, a, b, iterations);
    Ok(if refined.value >= best.1 { refined } else { Maximum { x: lo + step * best.0 as f64, value: best.1 } })
}

/// Bisection for a root of `f` on `[lo, hi]` given a sign change.
/// Returns `None` when the endpoints do not bracket a root.
pub fn bisect_root(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, max_iter: usize) -> Option<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() || !flo.is_finite() || !fhi.is_finite() {
        return None;
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_peak() {
        let m = golden_section_max(|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 200);
        assert!((m.x - 0.3).abs() < 1e-7);
    }

    #[test]
    fn scan_escapes_local_maximum() {
        // local max at 0.2 (height 0.5), global at 0.8 (height 1)
        let f = |x: f64| (-(x - 0.2f64).powi(2) * 400.0).exp() * 0.5 + (-(x - 0.8f64).powi(2) * 400.0).exp();
        let m = scan_then_golden_max(f, 0.0, 1.0, 1000, 200).unwrap();
        assert!((m.x - 0.8).abs() < 1e-6);
    }

    #[test]
    fn bisect_needs_bracket() {
        assert!(bisect_root(|x| x * x + 1.0, -1.0, 1.0, 100).is_none());
        let r = bisect_root(|x| x * x - 2.0, 0.0, 2.0, 200).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }
}
