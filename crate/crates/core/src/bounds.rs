//! Closed-form constants and one-dimensional optimizations giving lower and
//! upper bounds on the Hessian integrability exponent `ε` of supersolutions
//! of the Pucci extremal inequality.
//!
//! Throughout, `ρ = Λ/λ ≥ 1` is the ellipticity ratio, `n` the dimension and
//! `k` the minimal number of nonpositive Hessian eigenvalues.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::lambert::{lambert_w0, lambert_wm1};
use crate::optimize::{bisect_root, scan_then_golden_max};

/// `(1 + √5)/2`, the step used in the global estimate.
pub const GOLDEN: f64 = 1.618_033_988_749_895;

const SCAN_POINTS: usize = 1000;
const GOLDEN_ITERATIONS: usize = 200;
const GAMMA_LO: f64 = 1e-9;
const GAMMA_HI: f64 = 1.0 - 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ellipticity {
    pub n: usize,
    pub ratio: f64,
    pub k: usize,
}

impl Ellipticity {
    pub fn new(n: usize, ratio: f64, k: usize) -> Result<Self> {
        let e = Ellipticity { n, ratio, k };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return domain(format!("dimension must be >= 2; got {}", self.n));
        }
        if !(self.ratio >= 1.0) || !self.ratio.is_finite() {
            return domain(format!("ellipticity ratio must be finite and >= 1; got {}", self.ratio));
        }
        if self.k < 1 || self.k >= self.n {
            return domain(format!("k must satisfy 1 <= k <= n-1; got k={} with n={}", self.k, self.n));
        }
        Ok(())
    }
}

fn pucci_c_raw(n: usize, ratio: f64, k: usize) -> f64 {
    let base = 1.0 + (ratio - 1.0) * k as f64 / (n - k) as f64;
    base.powf(k as f64 - n as f64)
}

/// `c = (1 + (ρ-1) k/(n-k))^{k-n}`, the measure-decay constant.
pub fn pucci_c(e: &Ellipticity) -> Result<f64> {
    e.validate()?;
    Ok(pucci_c_raw(e.n, e.ratio, e.k))
}

/// `max_{1≤i≤k} c(n, ρ, i)` together with the maximizing `i`.
pub fn c_star_argmax(e: &Ellipticity) -> Result<(f64, usize)> {
    e.validate()?;
    let mut best = (f64::NEG_INFINITY, 0);
    for i in 1..=e.k {
        let v = pucci_c_raw(e.n, e.ratio, i);
        if v > best.0 {
            best = (v, i);
        }
    }
    Ok(best)
}

pub fn c_star(e: &Ellipticity) -> Result<f64> {
    c_star_argmax(e).map(|(v, _)| v)
}

/// `ρ^{k-n} (1 + ((n-2k)/(n-k))(1 - 1/ρ))^{n-k}`, a lower bound for `c`
/// valid when `k < n/2`.
pub fn c_lower_bound(e: &Ellipticity) -> Result<f64> {
    e.validate()?;
    if 2 * e.k >= e.n {
        return domain(format!("c lower bound needs k < n/2; got k={} with n={}", e.k, e.n));
    }
    let (n, k, r) = (e.n as f64, e.k as f64, e.ratio);
    Ok(r.powf(k - n) * (1.0 + (n - 2.0 * k) / (n - k) * (1.0 - 1.0 / r)).powf(n - k))
}

/// `φ(γ) = ln(1 - cγⁿ) / ln(1 - γ)`.
pub fn phi(gamma: f64, c: f64, n: usize) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return domain(format!("phi needs 0 < gamma < 1; got {gamma}"));
    }
    if !(c > 0.0 && c <= 1.0) {
        return domain(format!("phi needs 0 < c <= 1; got {c}"));
    }
    Ok(phi_unchecked(gamma, c, n))
}

fn phi_unchecked(gamma: f64, c: f64, n: usize) -> f64 {
    (-c * gamma.powi(n as i32)).ln_1p() / (-gamma).ln_1p()
}

/// `f(γ) = cγⁿ / (-ln(1 - γ))`, a pointwise lower bound for `φ`.
pub fn f_lower(gamma: f64, c: f64, n: usize) -> f64 {
    c * gamma.powi(n as i32) / -(-gamma).ln_1p()
}

/// `h(γ) = ncγⁿ⁻¹(1-γ)/(1-cγⁿ) - φ(γ)`. The sign of `φ'` equals the sign of `h`.
fn stationarity(gamma: f64, c: f64, n: usize) -> f64 {
    let gn = gamma.powi(n as i32);
    n as f64 * c * gamma.powi(n as i32 - 1) * (1.0 - gamma) / (1.0 - c * gn) - phi_unchecked(gamma, c, n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteriorOptimum {
    pub gamma0: f64,
    pub epsilon: f64,
    pub residual: f64,
}

/// Maximize `φ(·; c, n)` over `(0, 1)`.
///
/// For `c = 1` the supremum is not attained: `φ` increases to `1` as
/// `γ → 1`, where the stationarity identity also holds in the limit. That
/// case returns `γ₀ = 1`, `ε = 1`, residual `0`.
pub fn maximize_phi(c: f64, n: usize) -> Result<InteriorOptimum> {
    if !(c > 0.0 && c <= 1.0) {
        return domain(format!("phi needs 0 < c <= 1; got {c}"));
    }
    if n < 2 {
        return domain(format!("dimension must be >= 2; got {n}"));
    }
    if c == 1.0 {
        return Ok(InteriorOptimum { gamma0: 1.0, epsilon: 1.0, residual: 0.0 });
    }
    let objective = |g: f64| phi_unchecked(g, c, n);
    let coarse = scan_then_golden_max(objective, GAMMA_LO, GAMMA_HI, SCAN_POINTS, GOLDEN_ITERATIONS)?;
    let h = |g: f64| stationarity(g, c, n);

    let mut gamma0 = coarse.x;
    let mut width = 1e-6;
    while width < 0.5 {
        let lo = (coarse.x - width).max(GAMMA_LO);
        let hi = (coarse.x + width).min(GAMMA_HI);
        if h(lo) > 0.0 && h(hi) < 0.0 {
            if let Some(root) = bisect_root(h, lo, hi, 200) {
                if objective(root) >= coarse.value - 1e-15 {
                    gamma0 = root;
                }
            }
            break;
        }
        width *= 4.0;
    }
    let epsilon = objective(gamma0);
    if !(epsilon > 0.0) {
        return Err(Error::Optimization(format!("phi maximum is not positive (c={c}, n={n})")));
    }
    Ok(InteriorOptimum { gamma0, epsilon, residual: h(gamma0).abs() })
}

/// `ε(γ₀) = sup φ` with `c = c⋆`.
pub fn epsilon_interior(e: &Ellipticity) -> Result<InteriorOptimum> {
    maximize_phi(c_star(e)?, e.n)
}

/// `γ⋆ = 1 + 1/(n W₋₁(-e^{-1/n}/n))`, the root in `(0,1)` of
/// `γ/(1-γ) = -n ln(1-γ)`.
pub fn gamma_star(n: usize) -> Result<f64> {
    if n < 2 {
        return domain(format!("gamma_star needs n >= 2; got {n}"));
    }
    let nf = n as f64;
    let w = lambert_wm1(-(-1.0 / nf).exp() / nf)?.value;
    Ok(1.0 + 1.0 / (nf * w))
}

/// `n(e-1)/(1 + ne ln n) · (n ln n/(1 + n ln n))ⁿ`.
pub fn closed_form_prefactor(n: usize) -> Result<f64> {
    if n < 2 {
        return domain(format!("closed-form bound needs n >= 2; got {n}"));
    }
    let nf = n as f64;
    let l = nf.ln();
    Ok(nf * (E - 1.0) / (1.0 + nf * E * l) * (nf * l / (1.0 + nf * l)).powi(n as i32))
}

/// Closed-form lower bound for `ε(γ₀)`, prefactor times `c⋆`.
pub fn closed_form_lower(e: &Ellipticity) -> Result<f64> {
    Ok(closed_form_prefactor(e.n)? * c_star(e)?)
}

/// `τₙ = prefactor · ln n`, increasing from `τ₃ ≈ 0.2568` to `1 - 1/e`.
pub fn tau(n: usize) -> Result<f64> {
    Ok(closed_form_prefactor(n)? * (n as f64).ln())
}

/// `c_lower_bound / (4 ln n)` for `n ≥ 3`, `k < n/2`.
pub fn refined_lower(e: &Ellipticity) -> Result<f64> {
    if e.n < 3 {
        return domain(format!("refined bound needs n >= 3; got {}", e.n));
    }
    Ok(c_lower_bound(e)? / (4.0 * (e.n as f64).ln()))
}

/// `(1 + (2/3)(1 - 1/ρ))^{n-1} ρ^{-(n-1)} / (4 ln n)`.
pub fn abstract_lower(n: usize, ratio: f64) -> Result<f64> {
    if n < 3 {
        return domain(format!("abstract bound needs n >= 3; got {n}"));
    }
    check_ratio(ratio)?;
    let m = n as f64 - 1.0;
    Ok((1.0 + 2.0 / 3.0 * (1.0 - 1.0 / ratio)).powf(m) * ratio.powf(-m) / (4.0 * (n as f64).ln()))
}

fn check_ratio(ratio: f64) -> Result<()> {
    if !(ratio >= 1.0) || !ratio.is_finite() {
        return domain(format!("ellipticity ratio must be finite and >= 1; got {ratio}"));
    }
    Ok(())
}

/// `n / ((n-1)ρ + 1)`, the upper bound realised by the radial counterexample.
pub fn epsilon_upper(n: usize, ratio: f64) -> Result<f64> {
    if n < 2 {
        return domain(format!("dimension must be >= 2; got {n}"));
    }
    check_ratio(ratio)?;
    Ok(n as f64 / ((n as f64 - 1.0) * ratio + 1.0))
}

/// `2 / (ρ + 1)`.
pub fn ass_conjecture(ratio: f64) -> Result<f64> {
    check_ratio(ratio)?;
    Ok(2.0 / (ratio + 1.0))
}

/// `1 - c⋆ δⁿ/(1+δ)^{n+1}` with `δ` the golden ratio.
fn global_factor(c: f64, n: usize) -> f64 {
    1.0 - c * GOLDEN.powi(n as i32) / (1.0 + GOLDEN).powi(n as i32 + 1)
}

/// `ε^G = -ln(1 - c⋆ δⁿ/(1+δ)^{n+1}) / ln(1+δ)`.
pub fn epsilon_global(e: &Ellipticity) -> Result<f64> {
    let q = global_factor(c_star(e)?, e.n);
    Ok(-q.ln() / (1.0 + GOLDEN).ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdData {
    pub alpha: f64,
    pub j_alpha: u64,
    pub t_min_interior: f64,
    pub t_min_global: f64,
    pub interior_scale: f64,
    pub global_scale: f64,
}

/// `n²(3+√5)⁹ / (2⁵(1+√5)⁴)`.
pub fn global_scale(n: usize) -> f64 {
    let s5 = 5f64.sqrt();
    (n * n) as f64 * (3.0 + s5).powi(9) / (32.0 * (1.0 + s5).powi(4))
}

/// Tail thresholds for a target exponent `0 < α < ε(γ₀)`.
pub fn thresholds(alpha: f64, e: &Ellipticity) -> Result<ThresholdData> {
    let opt = epsilon_interior(e)?;
    if !(alpha > 0.0 && alpha < opt.epsilon) {
        return domain(format!("alpha must lie in (0, {}); got {alpha}", opt.epsilon));
    }
    let ratio = alpha / (opt.epsilon - alpha);
    let j = ratio.ceil().max(0.0);
    if j > u64::MAX as f64 {
        return domain(format!("alpha {alpha} is too close to epsilon for j(alpha) to be representable"));
    }
    let g0 = opt.gamma0;
    let s5 = 5f64.sqrt();
    Ok(ThresholdData {
        alpha,
        j_alpha: j as u64,
        t_min_interior: (1.0 - g0).powf(-j - 1.0),
        t_min_global: (0.5 * (3.0 + s5)).powf(1.0 + j),
        interior_scale: (1.0 - g0) / g0 * 64.0,
        global_scale: global_scale(e.n),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct T0Point {
    pub x0: f64,
    pub t0: f64,
}

/// Maximizer `x₀` of `ln x = (ρ - 2 + x)/x` on `[1, n)` and the value
/// `t₀ = n(x₀ - 1)/(x₀ ln x₀)`.
pub fn t0_maximizer(n: usize, ratio: f64) -> Result<T0Point> {
    if n < 2 {
        return domain(format!("dimension must be >= 2; got {n}"));
    }
    if !(ratio > 1.0) || !ratio.is_finite() {
        return domain(format!("t0 needs a finite ratio > 1; got {ratio}"));
    }
    let d = ratio - 2.0;
    let x0 = if d.abs() < 1e-8 { E } else { d / lambert_w0(d / E)?.value };
    let t0 = n as f64 * (x0 - 1.0) / (x0 * x0.ln());
    Ok(T0Point { x0, t0 })
}

/// `ρ_β = 2 - β + (β - 1)(-β / W₀(-β e^{-β}))`, the ratio at which
/// `t₀ = n/β`.
pub fn rho_for_beta(n: usize, beta: f64) -> Result<f64> {
    if !(beta > 1.0 && beta <= n as f64) {
        return domain(format!("beta must lie in (1, {n}]; got {beta}"));
    }
    let w = lambert_w0(-beta * (-beta).exp())?.value;
    Ok(2.0 - beta + (beta - 1.0) * (-beta / w))
}

/// `ρⱼ` from `((1+δ)/δ) n (1+δ)² ρⱼ = q^{j+1}`, checking the two
/// inequalities the global induction relies on.
pub fn global_rho_j(j: u32, e: &Ellipticity) -> Result<f64> {
    let q = global_factor(c_star(e)?, e.n);
    let d = GOLDEN;
    let nf = e.n as f64;
    let rho = q.powf(j as f64 + 1.0) / ((1.0 + d) / d * nf * (1.0 + d).powi(2));
    if !(rho > 0.0 && rho < (1.0 + d).powi(-2)) {
        return Err(Error::Assertion(format!("rho_j = {rho} outside (0, (1+delta)^-2)")));
    }
    let lhs = d.powi(4) / (nf * nf * (1.0 + d).powi(8));
    let rhs = (1.0 + d).powf(j as f64) * rho * rho;
    if !(lhs <= rhs) {
        return Err(Error::Assertion(format!("delta^4/(n^2(1+delta)^8) = {lhs} exceeds (1+delta)^j rho_j^2 = {rhs}")));
    }
    Ok(rho)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    pub n: usize,
    pub ratio: f64,
    pub k: usize,
    pub c: f64,
    pub c_star: f64,
    pub c_star_index: usize,
    pub gamma0: f64,
    pub epsilon_interior: f64,
    pub gamma_star: f64,
    pub f_at_gamma_star: f64,
    pub closed_form_lower: f64,
    pub tau_n: f64,
    pub refined_lower: Option<f64>,
    pub abstract_lower: Option<f64>,
    pub epsilon_upper: f64,
    pub ass_conjecture: f64,
    pub epsilon_global: f64,
    pub stationarity_residual: f64,
    pub warnings: Vec<String>,
}

/// Every bound for one parameter set.
pub fn exponent_report(e: &Ellipticity) -> Result<ExponentReport> {
    e.validate()?;
    let (cs, idx) = c_star_argmax(e)?;
    let opt = maximize_phi(cs, e.n)?;
    let gs = gamma_star(e.n)?;
    let mut warnings = Vec::new();
    if e.n == 2 {
        warnings.push("closed_form_lower and tau_n evaluated at n = 2, below the stated range n >= 3".to_string());
    }
    let refined = if e.n >= 3 && 2 * e.k < e.n {
        Some(refined_lower(e)?)
    } else {
        warnings.push("refined_lower needs n >= 3 and k < n/2; omitted".to_string());
        None
    };
    let abs = if e.n >= 3 { Some(abstract_lower(e.n, e.ratio)?) } else { None };
    warnings.push("tau_n is reported as the mu_n sequence of the headline bound".to_string());
    Ok(ExponentReport {
        n: e.n,
        ratio: e.ratio,
        k: e.k,
        c: pucci_c(e)?,
        c_star: cs,
        c_star_index: idx,
        gamma0: opt.gamma0,
        epsilon_interior: opt.epsilon,
        gamma_star: gs,
        f_at_gamma_star: f_lower(gs, cs, e.n),
        closed_form_lower: closed_form_prefactor(e.n)? * cs,
        tau_n: tau(e.n)?,
        refined_lower: refined,
        abstract_lower: abs,
        epsilon_upper: epsilon_upper(e.n, e.ratio)?,
        ass_conjecture: ass_conjecture(e.ratio)?,
        epsilon_global: epsilon_global(e)?,
        stationarity_residual: opt.residual,
        warnings,
    })
}
