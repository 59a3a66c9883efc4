//! Discrete convex and `a`-convex envelopes over the sample points of a
//! grid that lie in its domain ball.
//!
//! The convex envelope at `x₀` is the largest value at `x₀` of an affine
//! function lying below the data at every domain sample. In one dimension
//! it is read off the lower convex hull. In two and three dimensions each
//! point solves the linear program
//!
//! ```text
//! maximize  b + g·x₀   subject to  b + g·xᵢ ≤ wᵢ  for every sample i
//! ```
//!
//! with Seidel's algorithm. The `a`-convex envelope uses the identity
//! `Γᵃ_v = conv(v + (a/2)|x - c|²) - (a/2)|x - c|²`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::grid::{GridFunction, GridSpec};
use crate::lp::{maximize, LpProblem, LpResult};

const PERMUTATION_SEED: u64 = 0x5eed_0fc0_4ec5;
pub(crate) const CHUNK: usize = 64;

/// `10 h² (a + 1)`, absorbing the `O(h²)` error of discrete tangency.
pub fn default_tolerance(spacing: f64, opening: f64) -> f64 {
    10.0 * spacing * spacing * (opening + 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeResult {
    pub opening: f64,
    /// NaN outside the domain ball.
    pub envelope: Vec<f64>,
    pub contact_mask: Vec<bool>,
    pub tolerance_used: f64,
}

impl EnvelopeResult {
    /// Number of domain samples not in the contact set.
    pub fn non_contact_count(&self, spec: &GridSpec) -> usize {
        (0..spec.len()).filter(|&i| spec.inside(i) && !self.contact_mask[i]).count()
    }
}

/// Domain samples of a grid with their offsets from the centre, plus the
/// fixed constraint order used by the LP.
pub(crate) struct Cloud {
    pub dim: usize,
    pub idx: Vec<usize>,
    pub x: Vec<[f64; 3]>,
    pub spacing: f64,
    pub diameter: f64,
    perm: Vec<usize>,
}

impl Cloud {
    pub fn new(spec: &GridSpec) -> Self {
        let idx = spec.domain_points();
        let x: Vec<[f64; 3]> = idx.iter().map(|&i| spec.offset(i)).collect();
        let mut perm: Vec<usize> = (0..idx.len()).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(PERMUTATION_SEED));
        Cloud { dim: spec.dim, idx, x, spacing: spec.spacing, diameter: 2.0 * spec.domain_radius, perm }
    }

    pub fn len(&self) -> usize {
        self.idx.len()
    }

    pub fn gather(&self, values: &[f64]) -> Vec<f64> {
        self.idx.iter().map(|&i| values[i]).collect()
    }

    pub fn sq_norm(&self, k: usize) -> f64 {
        let x = &self.x[k];
        x[0] * x[0] + x[1] * x[1] + x[2] * x[2]
    }

    /// Largest slope an optimal supporting plane can need: it interpolates
    /// data at `n + 1` lattice points, so `|g| ≤ n diam^{n-1} osc / hⁿ`.
    pub fn slope_cap(&self, osc: f64) -> f64 {
        let n = self.dim as i32;
        2.0 * self.dim as f64 * self.diameter.powi(n - 1) * osc / self.spacing.powi(n) + 1.0
    }

    /// Constraint order with `hint` in front.
    pub fn order_with(&self, hint: &[usize]) -> Vec<usize> {
        let mut order = Vec::with_capacity(hint.len() + self.perm.len());
        order.extend_from_slice(hint);
        order.extend_from_slice(&self.perm);
        order
    }

    /// Convex envelope of `w` (indexed like the cloud) at every cloud point.
    pub fn hull_values(&self, w: &[f64]) -> Vec<f64> {
        if self.dim == 1 {
            return lower_hull_1d(&self.x.iter().map(|p| p[0]).collect::<Vec<_>>(), w);
        }
        let solver = HullSolver::new(self, w);
        let chunks: Vec<Vec<f64>> = (0..self.len())
            .collect::<Vec<_>>()
            .par_chunks(CHUNK)
            .map(|ks| {
                let mut hint = Vec::new();
                ks.iter().map(|&k| solver.value_at(k, &mut hint)).collect()
            })
            .collect();
        chunks.concat()
    }

    /// Convex envelope of `w` at the single cloud point `k`.
    pub fn hull_value_at(&self, w: &[f64], k: usize) -> f64 {
        if self.dim == 1 {
            return lower_hull_1d(&self.x.iter().map(|p| p[0]).collect::<Vec<_>>(), w)[k];
        }
        HullSolver::new(self, w).value_at(k, &mut Vec::new())
    }
}

struct HullSolver<'a> {
    cloud: &'a Cloud,
    w: &'a [f64],
    rows: Vec<f64>,
    wmax: f64,
    osc: f64,
}

impl<'a> HullSolver<'a> {
    fn new(cloud: &'a Cloud, w: &'a [f64]) -> Self {
        let d = cloud.dim + 1;
        let mut rows = Vec::with_capacity(d * cloud.len());
        for p in &cloud.x {
            rows.push(1.0);
            rows.extend_from_slice(&p[..cloud.dim]);
        }
        let (lo, hi) = w.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
        HullSolver { cloud, w, rows, wmax: lo.abs().max(hi.abs()), osc: hi - lo }
    }

    fn value_at(&self, k: usize, hint: &mut Vec<usize>) -> f64 {
        let n = self.cloud.dim;
        let x0 = &self.cloud.x[k];
        let mut obj = vec![1.0];
        obj.extend_from_slice(&x0[..n]);
        let cap = self.cloud.slope_cap(self.osc);
        let mut g = (4.0 * self.osc / self.cloud.spacing + 1.0).min(cap);
        loop {
            let b = self.wmax + g * self.cloud.diameter * n as f64 + 1.0;
            let mut lower = vec![-b];
            let mut upper = vec![b];
            lower.extend(std::iter::repeat_n(-g, n));
            upper.extend(std::iter::repeat_n(g, n));
            let problem = LpProblem { dim: n + 1, rows: &self.rows, rhs: self.w, lower: &lower, upper: &upper };
            let order = self.cloud.order_with(hint);
            match maximize(&problem, &obj, &order) {
                LpResult::Optimal { x, tight } => {
                    let at_cap = x[1..].iter().any(|s| s.abs() >= g * (1.0 - 1e-9));
                    if at_cap && g < cap {
                        g = (g * 16.0).min(cap);
                        continue;
                    }
                    *hint = tight;
                    let v = x[0] + (0..n).map(|j| x[j + 1] * x0[j]).sum::<f64>();
                    return v.min(self.w[k]);
                }
                // b = min w, g = 0 is always feasible
                LpResult::Infeasible => return self.w[k],
            }
        }
    }
}

/// Lower convex hull of `(xs, ys)` with `xs` increasing, evaluated at every `xs`.
pub(crate) fn lower_hull_1d(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let mut hull: Vec<usize> = Vec::new();
    for i in 0..xs.len() {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (xs[b] - xs[a]) * (ys[i] - ys[a]) - (ys[b] - ys[a]) * (xs[i] - xs[a]);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let mut out = vec![0.0; xs.len()];
    for seg in hull.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        for i in a..=b {
            let t = (xs[i] - xs[a]) / (xs[b] - xs[a]);
            out[i] = (ys[a] + t * (ys[b] - ys[a])).min(ys[i]);
        }
    }
    if hull.len() == 1 {
        out[0] = ys[0];
    }
    out
}

fn scatter(spec: &GridSpec, cloud: &Cloud, vals: &[f64]) -> Vec<f64> {
    let mut out = vec![f64::NAN; spec.len()];
    for (k, &i) in cloud.idx.iter().enumerate() {
        out[i] = vals[k];
    }
    out
}

/// Largest function below `w` that is convex on the domain sample set.
pub fn convex_envelope(w: &GridFunction) -> Result<GridFunction> {
    w.validate()?;
    let cloud = Cloud::new(&w.spec);
    let vals = cloud.hull_values(&cloud.gather(&w.values));
    GridFunction::new(w.spec.clone(), scatter(&w.spec, &cloud, &vals))
}

/// `a`-convex envelope and contact set; `tol` defaults to
/// [`default_tolerance`].
pub fn a_convex_envelope(v: &GridFunction, a: f64, tol: Option<f64>) -> Result<EnvelopeResult> {
    v.validate()?;
    let cloud = Cloud::new(&v.spec);
    a_convex_envelope_on(&cloud, v, a, tol)
}

pub(crate) fn a_convex_envelope_on(cloud: &Cloud, v: &GridFunction, a: f64, tol: Option<f64>) -> Result<EnvelopeResult> {
    if !(a >= 0.0) || !a.is_finite() {
        return domain(format!("opening must be finite and >= 0; got {a}"));
    }
    let tolerance_used = tol.unwrap_or_else(|| default_tolerance(v.spec.spacing, a));
    if !(tolerance_used >= 0.0) {
        return domain(format!("tolerance must be >= 0; got {tolerance_used}"));
    }
    let vals = cloud.gather(&v.values);
    let lift: Vec<f64> = (0..cloud.len()).map(|k| 0.5 * a * cloud.sq_norm(k)).collect();
    let w: Vec<f64> = vals.iter().zip(&lift).map(|(v, l)| v + l).collect();
    let hull = cloud.hull_values(&w);
    let env: Vec<f64> = hull.iter().zip(&lift).map(|(h, l)| h - l).collect();
    let mut contact_mask = vec![false; v.spec.len()];
    for (k, &i) in cloud.idx.iter().enumerate() {
        contact_mask[i] = vals[k] - env[k] <= tolerance_used;
    }
    Ok(EnvelopeResult { opening: a, envelope: scatter(&v.spec, cloud, &env), contact_mask, tolerance_used })
}
