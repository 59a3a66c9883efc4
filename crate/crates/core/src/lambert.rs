//! Real branches of the Lambert W function.
//!
//! `W` inverts `w ↦ w e^w`. On the reals there are two branches: the
//! principal branch `W₀ : [-1/e, ∞) → [-1, ∞)` and the lower branch
//! `W₋₁ : [-1/e, 0) → (-∞, -1]`. Both meet at the branch point
//! `(-1/e, -1)`.
//!
//! Evaluation seeds Halley's method from a series or asymptotic guess and
//! falls back to bisection on a guaranteed bracket if the residual is not
//! met. Within `1e-12` of the branch point the square-root expansion is
//! used directly.

use std::f64::consts::E;

use crate::error::{domain, Result};

/// `1/e` rounded to the nearest `f64`. The branch point is taken to be
/// `-INV_E`, so `lambert_w0(-INV_E)` is exactly `-1`.
pub const INV_E: f64 = 1.0 / E;

const DOMAIN_SLACK: f64 = 1e-15;
const BRANCH_SERIES_RADIUS: f64 = 1e-12;
const MAX_HALLEY: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Principal,
    MinusOne,
}

/// A Lambert W value together with the residual `|W e^W - z|` achieved.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct BranchValue {
    pub value: f64,
    pub branch: Branch,
    pub residual: f64,
}

impl BranchValue {
    /// `dW/dz` at the argument `z` this value was computed for.
    pub fn derivative(&self, z: f64) -> f64 {
        lambert_derivative(self.value, z)
    }
}

/// Residual tolerance used throughout: `1e-12 · max(1, |z|)`.
pub fn residual_tolerance(z: f64) -> f64 {
    1e-12 * z.abs().max(1.0)
}

/// `dW/dz = W / (z (1 + W))`, with the removable singularity at `z = 0`
/// filled in (`W₀'(0) = 1`). Infinite at the branch point.
pub fn lambert_derivative(w: f64, z: f64) -> f64 {
    if z == 0.0 {
        return 1.0;
    }
    if w == -1.0 {
        return f64::INFINITY;
    }
    w / (z * (1.0 + w))
}

fn residual(w: f64, z: f64) -> f64 {
    (w * w.exp() - z).abs()
}

/// Square-root expansion about the branch point in `p = ±sqrt(2(ez + 1))`.
fn branch_series(p: f64) -> f64 {
    // Coefficients of W = -1 + p - p²/3 + 11p³/72 - 43p⁴/540 + 769p⁵/17280 - ...
    -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0 + p * (-43.0 / 540.0 + p * (769.0 / 17280.0)))))
}

fn branch_offset(z: f64) -> f64 {
    // 2(ez + 1) computed as 2e(z + 1/e) to keep cancellation in the sum
    (2.0 * E * (z + INV_E)).max(0.0)
}

fn check_real(z: f64) -> Result<()> {
    if z.is_nan() {
        return domain("Lambert W argument is NaN");
    }
    if z < -INV_E - DOMAIN_SLACK {
        return domain(format!("Lambert W argument {z} is below -1/e"));
    }
    Ok(())
}

/// Halley iteration on `f(w) = w e^w - z`.
fn halley_direct(z: f64, mut w: f64) -> f64 {
    for _ in 0..MAX_HALLEY {
        let ew = w.exp();
        let f = w * ew - z;
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        if denom == 0.0 || !denom.is_finite() {
            break;
        }
        let step = f / denom;
        let next = w - step;
        if !next.is_finite() {
            break;
        }
        w = next;
        if step.abs() <= 4.0 * f64::EPSILON * w.abs().max(1e-300) {
            break;
        }
    }
    w
}

/// Halley iteration on `g(w) = w + ln|w| - ln|z|`; well conditioned away
/// from the branch point and immune to overflow in `e^w`.
fn halley_log(log_abs_z: f64, mut w: f64) -> f64 {
    for _ in 0..MAX_HALLEY {
        let g = w + w.abs().ln() - log_abs_z;
        let g1 = 1.0 + 1.0 / w;
        let g2 = -1.0 / (w * w);
        let denom = 2.0 * g1 * g1 - g * g2;
        if denom == 0.0 || !denom.is_finite() {
            break;
        }
        let step = 2.0 * g * g1 / denom;
        let next = w - step;
        if !next.is_finite() || next.signum() != w.signum() {
            break;
        }
        w = next;
        if step.abs() <= 4.0 * f64::EPSILON * w.abs() {
            break;
        }
    }
    w
}

/// Bisection for a sign change of `f` on `[lo, hi]`, where `f(lo) <= 0 <= f(hi)`.
fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Principal branch `W₀(z)` for `z ≥ -1/e`.
pub fn lambert_w0(z: f64) -> Result<BranchValue> {
    check_real(z)?;
    let make = |w: f64| BranchValue {
        value: w.max(-1.0),
        branch: Branch::Principal,
        residual: residual(w.max(-1.0), z),
    };
    if z == f64::INFINITY {
        return Ok(BranchValue { value: f64::INFINITY, branch: Branch::Principal, residual: 0.0 });
    }
    if z <= -INV_E {
        return Ok(make(-1.0));
    }
    if z == 0.0 {
        return Ok(make(0.0));
    }
    if z + INV_E < BRANCH_SERIES_RADIUS {
        return Ok(make(branch_series(branch_offset(z).sqrt())));
    }

    let w = if z < -0.25 {
        halley_direct(z, branch_series(branch_offset(z).sqrt()))
    } else if z < 10.0 {
        let l = z.ln_1p();
        let seed = l * (1.0 - l.ln_1p() / (2.0 + l));
        halley_direct(z, seed)
    } else {
        let l1 = z.ln();
        let l2 = l1.ln();
        halley_log(l1, l1 - l2 + l2 / l1)
    };

    let mut value = make(w);
    if !(value.residual <= residual_tolerance(z)) {
        let (lo, hi) = if z < 0.0 { (-1.0, 0.0) } else { (0.0, z.ln_1p().max(1.0)) };
        let w = if z > 1e300 {
            let lz = z.ln();
            bisect(lo, hi, |w| w + w.ln() - lz)
        } else {
            bisect(lo, hi, |w| w * w.exp() - z)
        };
        value = make(w);
    }
    Ok(value)
}

/// Lower branch `W₋₁(z)` for `-1/e ≤ z < 0`.
pub fn lambert_wm1(z: f64) -> Result<BranchValue> {
    check_real(z)?;
    if z >= 0.0 {
        return domain(format!("W_-1 is defined on [-1/e, 0); got {z}"));
    }
    let make = |w: f64| BranchValue {
        value: w.min(-1.0),
        branch: Branch::MinusOne,
        residual: residual(w.min(-1.0), z),
    };
    if z <= -INV_E {
        return Ok(make(-1.0));
    }
    if z + INV_E < BRANCH_SERIES_RADIUS {
        return Ok(make(branch_series(-branch_offset(z).sqrt())));
    }

    let log_abs_z = (-z).ln();
    let w = if z < -0.25 {
        halley_direct(z, branch_series(-branch_offset(z).sqrt()))
    } else {
        halley_log(log_abs_z, log_abs_z - (-log_abs_z).ln())
    };

    let mut value = make(w);
    if !(value.residual <= residual_tolerance(z)) {
        // The sharp lower bound from `wm1_envelope_bounds` gives the bracket.
        let lo = E / (E - 1.0) * log_abs_z - 1.0;
        // g is increasing on (-inf, -1]
        let w = bisect(lo, -1.0, |w| w + (-w).ln() - log_abs_z);
        value = make(w);
    }
    Ok(value)
}

/// `W₋₁(-e^{-s})` for `s ≥ 1`, evaluated in log form so that `s` may be
/// far beyond the range where `e^{-s}` is representable.
pub fn wm1_of_neg_exp(s: f64) -> Result<f64> {
    if !(s >= 1.0) {
        return domain(format!("W_-1(-e^-s) needs s >= 1; got {s}"));
    }
    if s < 700.0 {
        return Ok(lambert_wm1(-(-s).exp())?.value);
    }
    let seed = -s - s.ln();
    Ok(halley_log(-s, seed).min(-1.0))
}

/// Sharp bracket `-(e/(e-1))(u+1) ≤ W₋₁(-e^{-(u+1)}) ≤ -(u+1)` for `u ≥ 0`.
pub fn wm1_envelope_bounds(u: f64) -> Result<(f64, f64)> {
    if !(u >= 0.0) {
        return domain(format!("envelope bounds need u >= 0; got {u}"));
    }
    let hi = -(u + 1.0);
    Ok((E / (E - 1.0) * hi, hi))
}

/// `a(u) = -W₋₁(-e^{-(u+1)}) / (u+1)`, which lies in `[1, e/(e-1)]`.
pub fn ratio_a(u: f64) -> Result<f64> {
    if !(u >= 0.0) {
        return domain(format!("a(u) needs u >= 0; got {u}"));
    }
    Ok(-wm1_of_neg_exp(u + 1.0)? / (u + 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent bisection on `y e^y = z` over a fixed bracket.
    fn oracle_wm1(z: f64) -> f64 {
        let (mut lo, mut hi) = (-40.0_f64, -1.0_f64);
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            // y e^y decreasing on (-inf, -1]
            if mid * mid.exp() > z {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn special_values() {
        assert_eq!(lambert_w0(0.0).unwrap().value, 0.0);
        assert_eq!(lambert_w0(-INV_E).unwrap().value, -1.0);
        assert_eq!(lambert_wm1(-INV_E).unwrap().value, -1.0);
        assert_eq!(lambert_w0(-(-1.0f64).exp()).unwrap().value, -1.0);
        assert!((lambert_w0(E).unwrap().value - 1.0).abs() < 1e-15);
        let two = -2.0 * (-2.0f64).exp();
        assert!((lambert_wm1(two).unwrap().value + 2.0).abs() < 1e-14);
    }

    #[test]
    fn wm1_minus_tenth_matches_bisection() {
        let w = lambert_wm1(-0.1).unwrap().value;
        let oracle = oracle_wm1(-0.1);
        assert!((w - oracle).abs() < 1e-13, "{w} vs {oracle}");
        assert!((w + 3.577_152_063_957_297).abs() < 1e-12);
    }

    #[test]
    fn domain_errors() {
        assert!(lambert_w0(-0.4).is_err());
        assert!(lambert_w0(f64::NAN).is_err());
        assert!(lambert_wm1(0.0).is_err());
        assert!(lambert_wm1(0.5).is_err());
        assert!(lambert_wm1(-0.37).is_err());
        // Just below -1/e within the slack clamps to the branch point.
        assert_eq!(lambert_w0(-INV_E - 5e-16).unwrap().value, -1.0);
        assert!(wm1_envelope_bounds(-0.1).is_err());
        assert!(ratio_a(-1.0).is_err());
    }

    #[test]
    fn branch_point_neighbourhood_uses_series() {
        let z = -INV_E + 1e-13;
        let w0 = lambert_w0(z).unwrap();
        let wm = lambert_wm1(z).unwrap();
        assert!(w0.value > -1.0 && wm.value < -1.0);
        assert!(w0.residual <= residual_tolerance(z));
        assert!(wm.residual <= residual_tolerance(z));
        // symmetric to first order in p
        assert!(((w0.value + 1.0) + (wm.value + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn extreme_arguments() {
        for z in [1e-300, 1e-20, 1e10, 1e100, 1e300, f64::MAX] {
            let w = lambert_w0(z).unwrap();
            assert!(w.residual <= residual_tolerance(z), "z={z} res={}", w.residual);
        }
        for z in [-1e-300, -1e-100, -1e-10, -0.01, -0.3, -0.36] {
            let w = lambert_wm1(z).unwrap();
            assert!(w.residual <= residual_tolerance(z), "z={z} res={}", w.residual);
        }
    }

    #[test]
    fn envelope_bounds_examples() {
        let (lo, hi) = wm1_envelope_bounds(0.0).unwrap();
        assert!((lo + E / (E - 1.0)).abs() < 1e-15);
        assert_eq!(hi, -1.0);
        assert_eq!(lambert_wm1(-(-1.0f64).exp()).unwrap().value, hi);

        // lower bound attained at u = e - 2
        let w = wm1_of_neg_exp(E - 1.0).unwrap();
        assert!((w + E).abs() < 1e-12);

        let (lo, hi) = wm1_envelope_bounds(10.0).unwrap();
        assert!((lo + 11.0 * E / (E - 1.0)).abs() < 1e-12);
        let w = lambert_wm1(-(-11.0f64).exp()).unwrap().value;
        let oracle = oracle_wm1(-(-11.0f64).exp());
        assert!((w - oracle).abs() < 1e-12);
        assert!(lo <= w && w <= hi);
    }

    #[test]
    fn ratio_a_examples() {
        assert!((ratio_a(0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((ratio_a(E - 2.0).unwrap() - E / (E - 1.0)).abs() < 1e-12);
        let a10 = -oracle_wm1(-(-11.0f64).exp()) / 11.0;
        let a100 = ratio_a(100.0).unwrap();
        assert!(a100 > 1.0 && a100 < E / (E - 1.0));
        assert!(a100 - 1.0 < a10 - 1.0);
        // far tail stays finite and tends to 1
        let far = ratio_a(1e6).unwrap();
        assert!(far > 1.0 && far < 1.0001);
    }

    #[test]
    fn derivative_formula() {
        assert_eq!(lambert_w0(0.0).unwrap().derivative(0.0), 1.0);
        let z = 2.0;
        let w = lambert_w0(z).unwrap();
        let h = 1e-6 * z;
        let fd = (lambert_w0(z + h).unwrap().value - lambert_w0(z - h).unwrap().value) / (2.0 * h);
        assert!((fd - w.derivative(z)).abs() < 1e-6 * w.derivative(z).abs());
    }
}
