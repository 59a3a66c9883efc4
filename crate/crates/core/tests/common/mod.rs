#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use rand_chacha::ChaCha8Rng;
use w2eps::grid::{GridFunction, GridSpec};

/// Two-phase revised simplex: minimize `c·λ` subject to `A λ = b`, `λ ≥ 0`.
/// The basis is refactored from the original data every iteration, so no
/// pivoting error accumulates. Dantzig pricing, with Bland's rule after a
/// run of degenerate pivots. `None` when infeasible.
pub fn lp_min(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Option<f64> {
    let m = a.len();
    let n = c.len();
    let sign: Vec<f64> = b.iter().map(|v| if *v < 0.0 { -1.0 } else { 1.0 }).collect();
    let a: Vec<Vec<f64>> = (0..m).map(|i| a[i].iter().map(|v| v * sign[i]).collect()).collect();
    let b: Vec<f64> = (0..m).map(|i| b[i] * sign[i]).collect();
    let column = |j: usize| -> Vec<f64> { (0..m).map(|i| if j < n { a[i][j] } else if j - n == i { 1.0 } else { 0.0 }).collect() };
    let mut basis: Vec<usize> = (n..n + m).collect();
    let mut c1 = vec![0.0; n + m];
    c1[n..].iter_mut().for_each(|v| *v = 1.0);
    if phase(&a, &b, &c1, &mut basis, n + m, &column)? > 1e-9 {
        return None;
    }
    let mut c2 = c.to_vec();
    c2.resize(n + m, 0.0);
    phase(&a, &b, &c2, &mut basis, n, &column)
}

/// Solve `M x = r` by Gaussian elimination with partial pivoting.
fn solve(mut mat: Vec<Vec<f64>>, mut r: Vec<f64>) -> Option<Vec<f64>> {
    let m = r.len();
    for k in 0..m {
        let p = (k..m).max_by(|&i, &j| mat[i][k].abs().total_cmp(&mat[j][k].abs()))?;
        if mat[p][k].abs() < 1e-300 {
            return None;
        }
        mat.swap(k, p);
        r.swap(k, p);
        for i in k + 1..m {
            let f = mat[i][k] / mat[k][k];
            for j in k..m {
                mat[i][j] -= f * mat[k][j];
            }
            r[i] -= f * r[k];
        }
    }
    let mut x = vec![0.0; m];
    for k in (0..m).rev() {
        let s: f64 = (k + 1..m).map(|j| mat[k][j] * x[j]).sum();
        x[k] = (r[k] - s) / mat[k][k];
    }
    Some(x)
}

fn phase(
    a: &[Vec<f64>],
    b: &[f64],
    c: &[f64],
    basis: &mut [usize],
    allowed: usize,
    column: &dyn Fn(usize) -> Vec<f64>,
) -> Option<f64> {
    let m = b.len();
    let n = a[0].len();
    let scale = c.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    let mut degenerate_run = 0;
    for _ in 0..1_000_000 {
        let cols: Vec<Vec<f64>> = basis.iter().map(|&j| column(j)).collect();
        let bmat: Vec<Vec<f64>> = (0..m).map(|i| (0..m).map(|k| cols[k][i]).collect()).collect();
        let bt: Vec<Vec<f64>> = (0..m).map(|k| cols[k].clone()).collect();
        let xb = solve(bmat.clone(), b.to_vec())?;
        let y = solve(bt, basis.iter().map(|&j| c[j]).collect())?;
        let reduced = |j: usize| -> f64 {
            let d: f64 = if j < n { (0..m).map(|i| y[i] * a[i][j]).sum() } else { y[j - n] };
            c[j] - d
        };
        let threshold = -1e-12 * scale;
        let entering = if degenerate_run > 20 {
            (0..allowed).find(|&j| !basis.contains(&j) && reduced(j) < threshold)
        } else {
            (0..allowed)
                .filter(|j| !basis.contains(j))
                .map(|j| (j, reduced(j)))
                .filter(|&(_, r)| r < threshold)
                .min_by(|p, q| p.1.total_cmp(&q.1))
                .map(|(j, _)| j)
        };
        let Some(j) = entering else {
            return Some(basis.iter().zip(&xb).map(|(&k, x)| c[k] * x).sum());
        };
        let d = solve(bmat, column(j))?;
        let mut best: Option<(f64, usize)> = None;
        for i in 0..m {
            // an artificial left in the basis must stay at zero
            let stuck = basis[i] >= allowed && d[i].abs() > 1e-12;
            if d[i] > 1e-12 || stuck {
                let q = if stuck { 0.0 } else { xb[i].max(0.0) / d[i] };
                if best.is_none_or(|(bq, bi)| q < bq - 1e-15 || (q <= bq + 1e-15 && basis[i] < basis[bi])) {
                    best = Some((q, i));
                }
            }
        }
        let (q, r) = best?;
        degenerate_run = if q <= 1e-15 { degenerate_run + 1 } else { 0 };
        basis[r] = j;
    }
    panic!("simplex did not terminate");
}

/// `a`-convex envelope at one domain point by the convex-combination
/// oracle: minimize `Σ λᵢ (vᵢ + a/2 |xᵢ - x₀|²)` over weights with
/// `Σ λᵢ = 1`, `Σ λᵢ (xᵢ - x₀) = 0`.
pub fn oracle_envelope_at(v: &GridFunction, a: f64, k: usize) -> f64 {
    let spec = &v.spec;
    let d = spec.dim;
    let pts = spec.domain_points();
    let x0 = spec.coords(k);
    let mut rows = vec![vec![0.0; pts.len()]; d + 1];
    let mut cost = Vec::with_capacity(pts.len());
    for (col, &i) in pts.iter().enumerate() {
        let x = spec.coords(i);
        rows[0][col] = 1.0;
        let mut sq = 0.0;
        for ax in 0..d {
            let dx = x[ax] - x0[ax];
            rows[ax + 1][col] = dx;
            sq += dx * dx;
        }
        cost.push(v.values[i] + 0.5 * a * sq);
    }
    let mut b = vec![0.0; d + 1];
    b[0] = 1.0;
    lp_min(&rows, &b, &cost).expect("x0 is itself a feasible combination")
}

pub fn oracle_envelope(v: &GridFunction, a: f64) -> Vec<f64> {
    let pts = v.spec.domain_points();
    let vals: Vec<f64> = pts.par_iter().map(|&k| oracle_envelope_at(v, a, k)).collect();
    let mut out = vec![f64::NAN; v.values.len()];
    for (k, val) in pts.into_iter().zip(vals) {
        out[k] = val;
    }
    out
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform noise on the unit disc.
pub fn random_grid(points: usize, seed: u64) -> GridFunction {
    let spec = GridSpec::cube(2, points, 1.0).unwrap();
    let mut r = rng(seed);
    let values = (0..spec.len()).map(|i| if spec.inside(i) { r.gen::<f64>() } else { f64::NAN }).collect();
    GridFunction::new(spec, values).unwrap()
}

/// Sum of a few random Gaussian bumps and dips plus a tilt.
pub fn random_smooth(spec: &GridSpec, seed: u64) -> GridFunction {
    let mut r = rng(seed);
    let bumps: Vec<([f64; 3], f64, f64)> = (0..5)
        .map(|_| {
            let c = [r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)];
            (c, r.gen_range(-1.0..1.0), r.gen_range(2.0..12.0))
        })
        .collect();
    let tilt = [r.gen_range(-0.5..0.5), r.gen_range(-0.5..0.5), r.gen_range(-0.5..0.5)];
    GridFunction::from_fn(spec.clone(), |x| {
        let mut s = 0.0;
        for (ax, xv) in x.iter().enumerate() {
            s += tilt[ax] * xv;
        }
        for (c, amp, width) in &bumps {
            let d2: f64 = x.iter().enumerate().map(|(ax, xv)| (xv - c[ax]).powi(2)).sum();
            s += amp * (-width * d2).exp();
        }
        s
    })
    .unwrap()
}

/// `min(cap, u)` for the radial bump `R^{α+2} r^{-α} + (α/2) r² - (1 + α/2) R²`.
pub fn capped_bump(spec: &GridSpec, alpha: f64, radius: f64, cap: f64) -> GridFunction {
    let u = |r: f64| {
        if r >= radius {
            0.0
        } else {
            radius.powf(alpha + 2.0) * r.powf(-alpha) + 0.5 * alpha * r * r - (1.0 + 0.5 * alpha) * radius * radius
        }
    };
    GridFunction::from_fn(spec.clone(), |x| {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r == 0.0 {
            cap
        } else {
            u(r).min(cap)
        }
    })
    .unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64], spec: &GridSpec) -> f64 {
    spec.domain_points()
        .into_iter()
        .map(|i| {
            let d = (a[i] - b[i]).abs();
            if d.is_nan() { f64::INFINITY } else { d }
        })
        .fold(0.0, f64::max)
}
