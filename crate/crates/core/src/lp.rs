//! Seidel's randomized incremental algorithm for small linear programs
//!
//! ```text
//! maximize  c·x   subject to  A x ≤ b,  lo ≤ x ≤ hi
//! ```
//!
//! in a handful of variables. Constraints are added one at a time; when the
//! current optimum violates a new constraint, the optimum of the enlarged
//! problem lies on its hyperplane, and the problem restricted to that
//! hyperplane is solved recursively in one dimension fewer.

const VIOLATION_RTOL: f64 = 1e-11;
const DEGENERATE_RTOL: f64 = 1e-11;
const INFEASIBLE_RTOL: f64 = 1e-9;

/// A problem whose rows are stored flat with stride `dim`.
#[derive(Debug, Clone, Copy)]
pub struct LpProblem<'a> {
    pub dim: usize,
    pub rows: &'a [f64],
    pub rhs: &'a [f64],
    pub lower: &'a [f64],
    pub upper: &'a [f64],
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpResult {
    /// `tight` lists the last constraints that moved the optimum; feeding
    /// them first into a nearby problem usually avoids most recursion.
    Optimal { x: Vec<f64>, tight: Vec<usize> },
    Infeasible,
}

fn box_optimum(obj: &[f64], lo: &[f64], hi: &[f64]) -> Vec<f64> {
    obj.iter()
        .zip(lo.iter().zip(hi))
        .map(|(&c, (&l, &h))| if c > 0.0 { h } else { l })
        .collect()
}

fn violated(a: &[f64], b: f64, x: &[f64]) -> bool {
    let mut s = 0.0;
    let mut scale = b.abs();
    for (ai, xi) in a.iter().zip(x) {
        let t = ai * xi;
        s += t;
        scale += t.abs();
    }
    s - b > VIOLATION_RTOL * scale
}

struct Sub {
    dim: usize,
    rows: Vec<f64>,
    rhs: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    obj: Vec<f64>,
}

struct Reduction {
    pivot: usize,
    ratio: Vec<f64>,
    offset: f64,
}

impl Reduction {
    fn lift(&self, y: &[f64]) -> Vec<f64> {
        let mut x = Vec::with_capacity(y.len() + 1);
        let mut xp = self.offset;
        let mut k = 0;
        for q in 0..=y.len() {
            if q == self.pivot {
                x.push(0.0);
            } else {
                xp -= self.ratio[q] * y[k];
                x.push(y[k]);
                k += 1;
            }
        }
        x[self.pivot] = xp;
        x
    }
}

/// Restrict to the hyperplane `a·x = b`, eliminating the variable with the
/// largest coefficient. Returns `None` if a previous constraint becomes
/// `0 ≤ negative` on the hyperplane.
fn reduce<'a>(
    dim: usize,
    a: &[f64],
    b: f64,
    obj: &[f64],
    lo: &[f64],
    hi: &[f64],
    prev: impl Iterator<Item = (&'a [f64], f64)>,
) -> Option<(Sub, Reduction)> {
    let pivot = (0..dim).max_by(|&i, &j| a[i].abs().total_cmp(&a[j].abs())).expect("dim >= 1");
    let ap = a[pivot];
    let ratio: Vec<f64> = a.iter().map(|&v| v / ap).collect();
    let offset = b / ap;
    let d = dim - 1;
    let keep = |v: &[f64]| -> Vec<f64> { (0..dim).filter(|&q| q != pivot).map(|q| v[q]).collect() };

    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    // box on the eliminated variable
    rows.extend((0..dim).filter(|&q| q != pivot).map(|q| -ratio[q]));
    rhs.push(hi[pivot] - offset);
    rows.extend((0..dim).filter(|&q| q != pivot).map(|q| ratio[q]));
    rhs.push(offset - lo[pivot]);

    for (c, e) in prev {
        let cp = c[pivot];
        let mut maxc = 0.0f64;
        let mut maxr = 0.0f64;
        let start = rows.len();
        for q in (0..dim).filter(|&q| q != pivot) {
            let v = c[q] - cp * ratio[q];
            maxc = maxc.max(c[q].abs());
            maxr = maxr.max(v.abs());
            rows.push(v);
        }
        maxc = maxc.max(cp.abs());
        let r = e - cp * offset;
        if maxr <= DEGENERATE_RTOL * maxc {
            rows.truncate(start);
            if r < -INFEASIBLE_RTOL * (e.abs() + (cp * offset).abs()) {
                return None;
            }
            continue;
        }
        rhs.push(r);
    }
    let obj_sub: Vec<f64> = (0..dim).filter(|&q| q != pivot).map(|q| obj[q] - obj[pivot] * ratio[q]).collect();
    Some((Sub { dim: d, rows, rhs, lo: keep(lo), hi: keep(hi), obj: obj_sub }, Reduction { pivot, ratio, offset }))
}

fn solve_1d(sub: &Sub) -> Option<Vec<f64>> {
    let (mut l, mut u) = (sub.lo[0], sub.hi[0]);
    for (&a, &b) in sub.rows.iter().zip(&sub.rhs) {
        if a > 0.0 {
            u = u.min(b / a);
        } else if a < 0.0 {
            l = l.max(b / a);
        } else if b < 0.0 {
            return None;
        }
    }
    if l > u {
        if l - u <= INFEASIBLE_RTOL * (1.0 + l.abs() + u.abs()) {
            return Some(vec![0.5 * (l + u)]);
        }
        return None;
    }
    Some(vec![if sub.obj[0] > 0.0 { u } else { l }])
}

fn solve_sub(sub: &Sub) -> Option<Vec<f64>> {
    if sub.dim == 1 {
        return solve_1d(sub);
    }
    let d = sub.dim;
    let mut x = box_optimum(&sub.obj, &sub.lo, &sub.hi);
    for i in 0..sub.rhs.len() {
        let a = &sub.rows[i * d..(i + 1) * d];
        if violated(a, sub.rhs[i], &x) {
            let prev = (0..i).map(|j| (&sub.rows[j * d..(j + 1) * d], sub.rhs[j]));
            let (inner, red) = reduce(d, a, sub.rhs[i], &sub.obj, &sub.lo, &sub.hi, prev)?;
            x = red.lift(&solve_sub(&inner)?);
        }
    }
    Some(x)
}

/// Maximize `objective · x`, visiting constraints in the order given by
/// `order` (indices into the problem rows; repeats are harmless).
pub fn maximize(problem: &LpProblem, objective: &[f64], order: &[usize]) -> LpResult {
    let d = problem.dim;
    let row = |i: usize| &problem.rows[i * d..(i + 1) * d];
    let whole = Sub {
        dim: d,
        rows: Vec::new(),
        rhs: Vec::new(),
        lo: problem.lower.to_vec(),
        hi: problem.upper.to_vec(),
        obj: objective.to_vec(),
    };
    if whole.lo.iter().zip(&whole.hi).any(|(l, h)| l > h) {
        return LpResult::Infeasible;
    }
    let mut x = box_optimum(objective, problem.lower, problem.upper);
    let mut tight = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        let a = row(i);
        if !violated(a, problem.rhs[i], &x) {
            continue;
        }
        if d == 1 {
            let mut sub = whole.clone_shape();
            for &j in &order[..=pos] {
                sub.rows.push(row(j)[0]);
                sub.rhs.push(problem.rhs[j]);
            }
            match solve_1d(&sub) {
                Some(v) => x = v,
                None => return LpResult::Infeasible,
            }
        } else {
            let prev = order[..pos].iter().map(|&j| (row(j), problem.rhs[j]));
            let Some((inner, red)) = reduce(d, a, problem.rhs[i], objective, problem.lower, problem.upper, prev) else {
                return LpResult::Infeasible;
            };
            match solve_sub(&inner) {
                Some(y) => x = red.lift(&y),
                None => return LpResult::Infeasible,
            }
        }
        tight.push(i);
    }
    let keep_from = tight.len().saturating_sub(d + 1);
    LpResult::Optimal { x, tight: tight.split_off(keep_from) }
}

impl Sub {
    fn clone_shape(&self) -> Sub {
        Sub { dim: self.dim, rows: Vec::new(), rhs: Vec::new(), lo: self.lo.clone(), hi: self.hi.clone(), obj: self.obj.clone() }
    }
}
