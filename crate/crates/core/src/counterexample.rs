//! The radial supersolution family
//!
//! ```text
//! u(x) = R^{α+2}|x|^{-α} + (α/2)|x|² - (1 + α/2)R²   for |x| < R,   0 otherwise,
//! ```
//!
//! its periodic truncated sum `v`, and closed-form lower bounds showing
//! that `‖Θ(v)‖_{L^ε(B_{1/2})}` grows without bound as `R → 0` whenever
//! `((n-1)ρ + 1) ε > n`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::grid::{GridFunction, GridSpec};
use crate::theta::linear_fit;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub n: usize,
    pub alpha: f64,
    pub radius: f64,
    pub lambda: f64,
    pub big_lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HessianEigenvalues {
    /// Multiplicity `n - 1`.
    pub tangential: f64,
    pub radial: f64,
}

impl RadialProfile {
    pub fn new(n: usize, alpha: f64, radius: f64, lambda: f64, big_lambda: f64) -> Result<Self> {
        if n < 3 {
            return domain(format!("the construction needs n >= 3; got {n}"));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return domain(format!("alpha must be positive; got {alpha}"));
        }
        if !(radius > 0.0 && radius < 1.0) {
            return domain(format!("R must lie in (0, 1); got {radius}"));
        }
        if !(lambda > 0.0 && big_lambda >= lambda) || !big_lambda.is_finite() {
            return domain(format!("need 0 < lambda <= Lambda; got {lambda}, {big_lambda}"));
        }
        Ok(RadialProfile { n, alpha, radius, lambda, big_lambda })
    }

    pub fn ratio(&self) -> f64 {
        self.big_lambda / self.lambda
    }

    /// Largest admissible exponent, `(n-1)Λ/λ - 1`.
    pub fn alpha_max(&self) -> f64 {
        (self.n as f64 - 1.0) * self.ratio() - 1.0
    }

    /// Whether `u` is a supersolution: `0 < α ≤ (n-1)Λ/λ - 1`.
    pub fn admissible(&self) -> bool {
        self.alpha <= self.alpha_max() * (1.0 + 1e-15)
    }

    /// Bump scale `λ/(Λα)`.
    pub fn scale(&self) -> f64 {
        self.lambda / (self.big_lambda * self.alpha)
    }

    /// Radius below which `scale · u > 1` near the singularity:
    /// `c̃ R^{(α+2)/α}` with `c̃ = (λ/(Λα))^{1/α}`.
    pub fn truncation_radius(&self) -> f64 {
        self.scale().powf(1.0 / self.alpha) * self.radius.powf((self.alpha + 2.0) / self.alpha)
    }

    fn rpow(&self) -> f64 {
        self.radius.powf(self.alpha + 2.0)
    }

    pub fn u_value(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return domain(format!("u is singular at r = 0; got r = {r}"));
        }
        Ok(self.u_unchecked(r))
    }

    fn u_unchecked(&self, r: f64) -> f64 {
        let (a, big_r) = (self.alpha, self.radius);
        if r >= big_r {
            return 0.0;
        }
        self.rpow() * r.powf(-a) + 0.5 * a * r * r - (1.0 + 0.5 * a) * big_r * big_r
    }

    /// `u'(r)`, zero for `r ≥ R`.
    pub fn u_derivative(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return domain(format!("u' is singular at r = 0; got r = {r}"));
        }
        if r >= self.radius {
            return Ok(0.0);
        }
        Ok(-self.alpha * self.rpow() * r.powf(-self.alpha - 1.0) + self.alpha * r)
    }

    /// `u''(r)` for `0 < r < R`.
    pub fn u_second_derivative(&self, r: f64) -> Result<f64> {
        self.check_inside(r)?;
        Ok(self.alpha * (self.alpha + 1.0) * self.rpow() * r.powf(-self.alpha - 2.0) + self.alpha)
    }

    fn check_inside(&self, r: f64) -> Result<()> {
        if !(r > 0.0 && r < self.radius) {
            return domain(format!("r must lie in (0, R = {}); got {r}", self.radius));
        }
        Ok(())
    }

    pub fn hessian_eigenvalues(&self, r: f64) -> Result<HessianEigenvalues> {
        self.check_inside(r)?;
        let a = self.alpha;
        let tangential = -a * r.powf(-a - 2.0) * (self.rpow() - r.powf(a + 2.0));
        Ok(HessianEigenvalues { tangential, radial: self.u_second_derivative(r)? })
    }

    /// `M⁻(D²u) = Λ (n-1) λ_tangential + λ λ_radial`, at most `Λ n α`
    /// when `α` is admissible.
    pub fn pucci_minus(&self, r: f64) -> Result<f64> {
        if !self.admissible() {
            return Err(Error::Admissibility(format!(
                "alpha = {} exceeds (n-1)Lambda/lambda - 1 = {}",
                self.alpha,
                self.alpha_max()
            )));
        }
        self.check_inside(r)?;
        let (a, m) = (self.alpha, self.n as f64 - 1.0);
        // singular part α(λ(α+1) - Λ(n-1)) R^{α+2} r^{-α-2}, whose coefficient
        // is <= 0 for admissible α; clamp the rounding residue at equality
        let lead = (self.lambda * (a + 1.0) - self.big_lambda * m).min(0.0);
        Ok(a * (lead * self.rpow() * r.powf(-a - 2.0) + m * self.big_lambda + self.lambda))
    }

    /// `(1 - 2^{-(α+2)}) α R^{α+2} r^{-α-2}`, valid on `(0, R/2]`.
    pub fn theta_lower(&self, r: f64) -> Result<f64> {
        if !(r > 0.0 && r <= 0.5 * self.radius) {
            return domain(format!("r must lie in (0, R/2 = {}]; got {r}", 0.5 * self.radius));
        }
        let a = self.alpha;
        Ok((1.0 - 2f64.powf(-(a + 2.0))) * a * self.rpow() * r.powf(-a - 2.0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuiltV {
    pub grid: GridFunction,
    /// Observed `sup |v|` over the domain samples.
    pub sup_abs: f64,
    pub truncation_radius: f64,
}

/// Sample `v(x) = -|x|² + Σ_y min(1, (λ/(Λα)) u(x - 2Ry))` on `spec`. Grids
/// of dimension below `n` are coordinate slices through the origin. The
/// balls `B(2Ry, R)` are disjoint, so only the nearest lattice centre
/// contributes.
pub fn build_v(p: &RadialProfile, spec: &GridSpec) -> Result<BuiltV> {
    if p.radius >= 0.25 {
        return Err(Error::Geometry(format!("R must be below 1/4; got {}", p.radius)));
    }
    if spec.dim > p.n {
        return Err(Error::Geometry(format!("grid dimension {} exceeds n = {}", spec.dim, p.n)));
    }
    let s = p.scale();
    let cell = 2.0 * p.radius;
    let grid = GridFunction::from_fn(spec.clone(), |x| {
        let mut r2 = 0.0;
        let mut d2 = 0.0;
        for &xi in x {
            r2 += xi * xi;
            let off = xi - cell * (xi / cell).round();
            d2 += off * off;
        }
        let d = d2.sqrt();
        let bump = if d == 0.0 { 1.0 } else { (s * p.u_unchecked(d)).min(1.0) };
        -r2 + bump
    })?;
    let sup_abs = spec.domain_points().into_iter().map(|i| grid.values[i].abs()).fold(0.0, f64::max);
    Ok(BuiltV { grid, sup_abs, truncation_radius: p.truncation_radius() })
}

/// Surface area of the unit sphere in `ℝⁿ`.
pub fn sphere_area(n: usize) -> f64 {
    match n {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI / (n as f64 - 2.0) * sphere_area(n - 2),
    }
}

/// Number of `y ∈ ℤⁿ` with `B(2Ry, R) ⊂ B_{1/2}`, i.e. `|y| ≤ (1/2 - R)/(2R)`.
pub fn ball_count(n: usize, radius: f64) -> u64 {
    if n == 0 || radius >= 0.5 {
        return 0;
    }
    let rho = (0.5 - radius) / (2.0 * radius);
    count_lattice(n, rho * rho)
}

/// Lattice points of `ℤⁿ` with squared norm `≤ r2`.
fn count_lattice(n: usize, r2: f64) -> u64 {
    if r2 < 0.0 {
        return 0;
    }
    let mut m = r2.sqrt().floor() as i64;
    while ((m + 1) * (m + 1)) as f64 <= r2 {
        m += 1;
    }
    while m >= 0 && (m * m) as f64 > r2 {
        m -= 1;
    }
    if n == 1 {
        return (2 * m + 1) as u64;
    }
    (-m..=m).map(|y| count_lattice(n - 1, r2 - (y * y) as f64)).sum()
}

/// `((1 - 4R)/(8√n R))ⁿ`, the packing lower bound for [`ball_count`].
pub fn ball_count_lower_estimate(n: usize, radius: f64) -> f64 {
    ((1.0 - 4.0 * radius) / (8.0 * (n as f64).sqrt() * radius)).powi(n as i32)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpBound {
    pub per_ball: f64,
    pub balls: u64,
    pub total: f64,
}

/// Condition `((n-1)ρ + 1) ε > n` under which some admissible `α` makes
/// `Θ^ε` non-integrable near the bump centres.
pub fn condition_holds(n: usize, ratio: f64, epsilon: f64) -> bool {
    ((n as f64 - 1.0) * ratio + 1.0) * epsilon > n as f64
}

/// Lower bound for `∫_{B_{1/2}} Θ(v)^ε`: on each ball `Θ ≥ K r^{-α-2}`
/// with `K = (1 - 2^{-(α+2)}) (λ/(Λα)) α R^{α+2}`, integrated over the
/// annulus from the truncation radius to `R/2`, times the ball count.
pub fn lp_lower_bound(p: &RadialProfile, epsilon: f64) -> Result<LpBound> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return domain(format!("epsilon must lie in (0, 1); got {epsilon}"));
    }
    if !condition_holds(p.n, p.ratio(), epsilon) {
        return Err(Error::Condition(format!(
            "((n-1)rho + 1) eps = {} must exceed n = {}",
            ((p.n as f64 - 1.0) * p.ratio() + 1.0) * epsilon,
            p.n
        )));
    }
    let nf = p.n as f64;
    if !p.admissible() || !(p.alpha > nf / epsilon - 2.0) {
        return Err(Error::Admissibility(format!(
            "alpha = {} must lie in ({}, {}]",
            p.alpha,
            nf / epsilon - 2.0,
            p.alpha_max()
        )));
    }
    let a = p.alpha;
    let k = (1.0 - 2f64.powf(-(a + 2.0))) * p.scale() * a * p.rpow();
    let pw = nf - (a + 2.0) * epsilon;
    let r0 = p.truncation_radius();
    let r1 = 0.5 * p.radius;
    let per_ball = if r0 < r1 {
        sphere_area(p.n) * k.powf(epsilon) * (r0.powf(pw) - r1.powf(pw)) / -pw
    } else {
        0.0
    };
    let balls = ball_count(p.n, p.radius);
    Ok(LpBound { per_ball, balls, total: per_ball * balls as f64 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceScan {
    pub n: usize,
    pub ratio: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub m_values: Vec<u32>,
    /// `R = 2^{-m}` for each `m`.
    pub r_sequence: Vec<f64>,
    pub ball_counts: Vec<u64>,
    pub lower_bounds: Vec<f64>,
    pub condition_ok: bool,
    pub strictly_increasing: bool,
    /// Slope and `R²` of `ln(lower_bound)` against `m`.
    pub log_slope: Option<f64>,
    pub log_r_squared: Option<f64>,
    pub note: Option<String>,
}

/// Evaluate [`lp_lower_bound`] along `R = 2^{-m}` with `λ = 1`, `Λ = ρ` and
/// the largest admissible `α = (n-1)ρ - 1`.
pub fn divergence_scan(n: usize, ratio: f64, epsilon: f64, m_values: &[u32]) -> Result<DivergenceScan> {
    if n < 3 {
        return domain(format!("the construction needs n >= 3; got {n}"));
    }
    if !(ratio >= 1.0) || !ratio.is_finite() {
        return domain(format!("ratio must be finite and >= 1; got {ratio}"));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return domain(format!("epsilon must lie in (0, 1); got {epsilon}"));
    }
    let alpha = (n as f64 - 1.0) * ratio - 1.0;
    let mut scan = DivergenceScan {
        n,
        ratio,
        epsilon,
        alpha,
        m_values: Vec::new(),
        r_sequence: Vec::new(),
        ball_counts: Vec::new(),
        lower_bounds: Vec::new(),
        condition_ok: condition_holds(n, ratio, epsilon),
        strictly_increasing: false,
        log_slope: None,
        log_r_squared: None,
        note: None,
    };
    if !scan.condition_ok {
        scan.note = Some(format!(
            "((n-1)rho + 1) eps = {} does not exceed n = {n}; no admissible alpha gives a divergent integral",
            ((n as f64 - 1.0) * ratio + 1.0) * epsilon
        ));
        return Ok(scan);
    }
    for &m in m_values {
        if m < 3 {
            return domain(format!("m must be >= 3 so that R < 1/4; got {m}"));
        }
        let radius = 2f64.powi(-(m as i32));
        let p = RadialProfile::new(n, alpha, radius, 1.0, ratio)?;
        let b = lp_lower_bound(&p, epsilon)?;
        scan.m_values.push(m);
        scan.r_sequence.push(radius);
        scan.ball_counts.push(b.balls);
        scan.lower_bounds.push(b.total);
    }
    scan.strictly_increasing = scan.lower_bounds.windows(2).all(|w| w[1] > w[0]);
    if scan.lower_bounds.len() >= 2 && scan.lower_bounds.iter().all(|&v| v > 0.0) {
        let ms: Vec<f64> = scan.m_values.iter().map(|&m| m as f64).collect();
        let logs: Vec<f64> = scan.lower_bounds.iter().map(|v| v.ln()).collect();
        let (slope, _, r2) = linear_fit(&ms, &logs);
        scan.log_slope = Some(slope);
        scan.log_r_squared = Some(r2);
    }
    Ok(scan)
}
