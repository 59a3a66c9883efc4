//! The opening field `Θ`: at each sample `x₀`, the least `A ≥ 0` such that
//! some paraboloid `v(x₀) + y·(x - x₀) - (A/2)|x - x₀|²` lies below `v` at
//! every domain sample. Each point is a linear program in `(A, y)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::envelope::{Cloud, CHUNK};
use crate::error::{domain, Error, Result};
use crate::grid::{GridFunction, GridSpec};
use crate::lp::{maximize, LpProblem, LpResult};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaField {
    /// Per-sample opening; `a_max` where no paraboloid of opening
    /// `≤ a_max` touches, NaN outside the domain.
    pub theta: Vec<f64>,
    pub converged: Vec<bool>,
    /// `Θ ∈ [lower, upper]`; `upper = ∞` where not converged.
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Domain samples with a missing axis neighbour.
    pub boundary: Vec<bool>,
    pub a_max: f64,
}

impl ThetaField {
    fn empty(spec: &GridSpec, a_max: f64) -> Self {
        let len = spec.len();
        ThetaField {
            theta: vec![f64::NAN; len],
            converged: vec![false; len],
            lower: vec![f64::NAN; len],
            upper: vec![f64::NAN; len],
            boundary: (0..len).map(|i| spec.inside(i) && !spec.is_interior(i)).collect(),
            a_max,
        }
    }

    fn set(&mut self, i: usize, value: Option<f64>, lower: f64, upper: f64) {
        match value {
            Some(t) => {
                self.theta[i] = t;
                self.converged[i] = true;
            }
            None => {
                self.theta[i] = self.a_max;
                self.converged[i] = false;
            }
        }
        self.lower[i] = lower;
        self.upper[i] = upper;
    }
}

fn check_a_max(a_max: f64) -> Result<()> {
    if !(a_max > 0.0) || !a_max.is_finite() {
        return domain(format!("a_max must be finite and positive; got {a_max}"));
    }
    Ok(())
}

struct ThetaSolver<'a> {
    cloud: &'a Cloud,
    v: Vec<f64>,
    osc: f64,
    a_max: f64,
}

impl ThetaSolver<'_> {
    /// `Some(Θ)` or `None` when `Θ > a_max`.
    fn solve(&self, k: usize, hint: &mut Vec<usize>, rows: &mut Vec<f64>, rhs: &mut Vec<f64>) -> Option<f64> {
        let n = self.cloud.dim;
        let x0 = self.cloud.x[k];
        let v0 = self.v[k];
        rows.clear();
        rhs.clear();
        for (p, &vi) in self.cloud.x.iter().zip(&self.v) {
            let mut r2 = 0.0;
            let start = rows.len();
            rows.push(0.0);
            for j in 0..n {
                let d = p[j] - x0[j];
                r2 += d * d;
                rows.push(d);
            }
            rows[start] = -0.5 * r2;
            rhs.push(vi - v0);
        }
        let curvature_osc = self.osc + 0.5 * self.a_max * self.cloud.diameter * self.cloud.diameter;
        let cap = self.cloud.slope_cap(curvature_osc);
        let mut ybox = (4.0 * curvature_osc / self.cloud.spacing + 1.0).min(cap);
        let mut obj = vec![0.0; n + 1];
        obj[0] = -1.0;
        loop {
            let mut lower = vec![0.0];
            let mut upper = vec![self.a_max];
            lower.extend(std::iter::repeat_n(-ybox, n));
            upper.extend(std::iter::repeat_n(ybox, n));
            let problem = LpProblem { dim: n + 1, rows, rhs, lower: &lower, upper: &upper };
            let order = self.cloud.order_with(hint);
            match maximize(&problem, &obj, &order) {
                LpResult::Optimal { x, tight } => {
                    let at_cap = x[1..].iter().any(|s| s.abs() >= ybox * (1.0 - 1e-9));
                    if at_cap && ybox < cap {
                        ybox = (ybox * 16.0).min(cap);
                        continue;
                    }
                    *hint = tight;
                    return Some(x[0].max(0.0));
                }
                LpResult::Infeasible => {
                    if ybox < cap {
                        ybox = (ybox * 16.0).min(cap);
                        continue;
                    }
                    return None;
                }
            }
        }
    }
}

/// Exact discrete `Θ` at every domain sample, capped at `a_max`.
pub fn theta_field(v: &GridFunction, a_max: f64) -> Result<ThetaField> {
    v.validate()?;
    check_a_max(a_max)?;
    let cloud = Cloud::new(&v.spec);
    let solver = ThetaSolver { cloud: &cloud, v: cloud.gather(&v.values), osc: v.oscillation(), a_max };
    let results: Vec<Option<f64>> = (0..cloud.len())
        .collect::<Vec<_>>()
        .par_chunks(CHUNK)
        .map(|ks| {
            let (mut hint, mut rows, mut rhs) = (Vec::new(), Vec::new(), Vec::new());
            ks.iter().map(|&k| solver.solve(k, &mut hint, &mut rows, &mut rhs)).collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .concat();
    let mut field = ThetaField::empty(&v.spec, a_max);
    for (k, &i) in cloud.idx.iter().enumerate() {
        match results[k] {
            Some(t) => field.set(i, Some(t), t, t),
            None => field.set(i, None, a_max, f64::INFINITY),
        }
    }
    Ok(field)
}

/// `Θ` by bisection on the opening: `x₀` is in the contact set of opening
/// `a` when `v(x₀) - Γᵃ_v(x₀) ≤ contact_tol`, with the envelope value at
/// `x₀` computed on its own. Slower than [`theta_field`]; kept as an
/// independent cross-check for small grids.
pub fn theta_field_bisection(v: &GridFunction, a_max: f64, bisect_tol: f64, contact_tol: f64) -> Result<ThetaField> {
    v.validate()?;
    check_a_max(a_max)?;
    if !(bisect_tol > 0.0) {
        return domain(format!("bisection tolerance must be positive; got {bisect_tol}"));
    }
    let cloud = Cloud::new(&v.spec);
    let vals = cloud.gather(&v.values);
    let contact = |k: usize, a: f64| -> bool {
        let w: Vec<f64> = (0..cloud.len()).map(|i| vals[i] + 0.5 * a * cloud.sq_norm(i)).collect();
        let env = cloud.hull_value_at(&w, k) - 0.5 * a * cloud.sq_norm(k);
        vals[k] - env <= contact_tol
    };
    let brackets: Vec<(Option<f64>, f64, f64)> = (0..cloud.len())
        .into_par_iter()
        .map(|k| {
            if contact(k, 0.0) {
                return (Some(0.0), 0.0, 0.0);
            }
            if !contact(k, a_max) {
                return (None, a_max, f64::INFINITY);
            }
            let (mut lo, mut hi) = (0.0, a_max);
            while hi - lo > bisect_tol {
                let mid = 0.5 * (lo + hi);
                if contact(k, mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            (Some(hi), lo, hi)
        })
        .collect();
    let mut field = ThetaField::empty(&v.spec, a_max);
    for (k, &i) in cloud.idx.iter().enumerate() {
        let (t, lo, hi) = brackets[k];
        field.set(i, t, lo, hi);
    }
    Ok(field)
}

/// Values of `Θ` at domain samples within `radius` of the centre;
/// unconverged samples count as `+∞`.
fn restricted_values(theta: &ThetaField, spec: &GridSpec, radius: f64) -> Vec<f64> {
    (0..spec.len())
        .filter(|&i| spec.inside(i) && spec.within(radius, i))
        .map(|i| if theta.converged[i] { theta.theta[i] } else { f64::INFINITY })
        .collect()
}

/// Cell measure of `{Θ > t} ∩ B_radius` for each `t` in `t_grid`.
pub fn tail_distribution(theta: &ThetaField, spec: &GridSpec, radius: f64, t_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if theta.theta.len() != spec.len() {
        return Err(Error::InvalidGrid("theta field does not match the grid".into()));
    }
    if t_grid.windows(2).any(|w| !(w[0] < w[1])) || t_grid.iter().any(|&t| !(t > 0.0)) {
        return domain("t grid must be positive and strictly increasing");
    }
    let vals = restricted_values(theta, spec, radius);
    let cell = spec.cell_measure();
    Ok(t_grid.iter().map(|&t| (t, vals.iter().filter(|&&v| v > t).count() as f64 * cell)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailFit {
    /// `κ` in `|{Θ > t}| ≈ C t^{-κ}`.
    pub exponent: f64,
    pub r_squared: f64,
    pub points_in_ball: usize,
    pub samples: Vec<(f64, f64)>,
}

/// Least-squares slope and `R²` of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (slope, my - slope * mx, r2)
}

/// Log-log fit of the tail of `Θ` inside `B_radius` over the range where
/// the count of samples with larger `Θ` lies in `[50, N/2]`, `N` being the
/// number of samples in the ball.
pub fn fit_tail_exponent(theta: &ThetaField, spec: &GridSpec, radius: f64) -> Result<TailFit> {
    let mut vals = restricted_values(theta, spec, radius);
    vals.sort_by(|a, b| b.total_cmp(a));
    let n = vals.len();
    let (lo, hi) = (50usize, n / 2);
    if hi <= lo {
        return Err(Error::DegenerateData(format!("only {n} samples in the ball; need more than 100")));
    }
    let cell = spec.cell_measure();
    let mut samples = Vec::new();
    let steps = 40;
    let mut last = 0;
    for s in 0..=steps {
        let m = ((lo as f64) * ((hi as f64) / lo as f64).powf(s as f64 / steps as f64)).round() as usize;
        if m == last || m > hi {
            continue;
        }
        last = m;
        // Θ at the m-th largest value: m samples have Θ ≥ t
        let t = vals[m - 1];
        if t.is_finite() && t > 0.0 {
            samples.push((t, m as f64 * cell));
        }
    }
    if samples.len() < 3 {
        return Err(Error::DegenerateData("fewer than 3 usable tail samples".into()));
    }
    let (t_lo, t_hi) = (samples[samples.len() - 1].0, samples[0].0);
    if t_hi <= t_lo * (1.0 + 1e-9) {
        return Err(Error::DegenerateData(format!("tail samples span no range of t (all near {t_hi})")));
    }
    let lx: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let ly: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let (slope, _, r2) = linear_fit(&lx, &ly);
    Ok(TailFit { exponent: -slope, r_squared: r2, points_in_ball: n, samples })
}
