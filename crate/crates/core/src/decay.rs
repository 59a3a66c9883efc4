//! Geometric decay of the non-contact measure `|B₁ ∖ A_{(1+δ)ʲ}|` as the
//! opening grows by factors of `1 + δ`.

use serde::{Deserialize, Serialize};

use crate::bounds::{c_star, Ellipticity};
use crate::envelope::{a_convex_envelope_on, Cloud};
use crate::error::{domain, Error, Result};
use crate::grid::GridFunction;
use crate::theta::linear_fit;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCount {
    pub j: usize,
    pub opening: f64,
    pub points: usize,
    pub measure: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub delta: f64,
    pub counts: Vec<DecayCount>,
    /// `exp` of the least-squares slope of `ln(measure)` against `j`,
    /// over the `j` with nonzero measure.
    pub empirical_ratio: f64,
    pub fit_r_squared: f64,
    pub c_star: f64,
    /// `1 - c⋆ (1 + 1/δ)^{-n}`.
    pub theoretical_ratio: f64,
}

/// Non-contact counts within the unit ball about the grid centre for
/// openings `(1+δ)ʲ`, `j = 0..=j_max`. `tol` defaults per opening to
/// [`crate::envelope::default_tolerance`].
pub fn decay_counts(v: &GridFunction, delta: f64, j_max: usize, tol: Option<f64>) -> Result<Vec<DecayCount>> {
    if !(delta > 0.0) || !delta.is_finite() {
        return domain(format!("delta must be positive; got {delta}"));
    }
    if j_max < 2 {
        return domain(format!("need at least j = 0..2; got j_max = {j_max}"));
    }
    v.validate()?;
    let cloud = Cloud::new(&v.spec);
    let cell = v.spec.cell_measure();
    let mut out = Vec::with_capacity(j_max + 1);
    for j in 0..=j_max {
        let opening = (1.0 + delta).powi(j as i32);
        let env = a_convex_envelope_on(&cloud, v, opening, tol)?;
        let points = cloud.idx.iter().filter(|&&i| v.spec.within(1.0, i) && !env.contact_mask[i]).count();
        out.push(DecayCount { j, opening, points, measure: points as f64 * cell, tolerance: env.tolerance_used });
    }
    Ok(out)
}

/// `1 - c⋆ (1 + 1/δ)^{-n}`.
pub fn theoretical_ratio(e: &Ellipticity, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return domain(format!("delta must be positive; got {delta}"));
    }
    Ok(1.0 - c_star(e)? * (1.0 + 1.0 / delta).powi(-(e.n as i32)))
}

/// Geometric ratio and `R²` fitted to the nonzero counts.
pub fn fit_decay(counts: &[DecayCount]) -> Result<(f64, f64)> {
    let (js, logs): (Vec<f64>, Vec<f64>) =
        counts.iter().filter(|c| c.points > 0).map(|c| (c.j as f64, c.measure.ln())).unzip();
    if js.len() < 3 {
        return Err(Error::DegenerateData(format!(
            "only {} openings have a nonempty non-contact set; need 3",
            js.len()
        )));
    }
    let (slope, _, r2) = linear_fit(&js, &logs);
    Ok((slope.exp(), r2))
}

pub fn decay_experiment(v: &GridFunction, delta: f64, j_max: usize, e: &Ellipticity) -> Result<DecayReport> {
    let counts = decay_counts(v, delta, j_max, None)?;
    let (empirical_ratio, fit_r_squared) = fit_decay(&counts)?;
    Ok(DecayReport {
        delta,
        counts,
        empirical_ratio,
        fit_r_squared,
        c_star: c_star(e)?,
        theoretical_ratio: theoretical_ratio(e, delta)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn convex_input_has_no_counts() {
        let spec = GridSpec::cube(2, 17, 1.0).unwrap();
        let v = GridFunction::from_fn(spec, |x| x[0] * x[0] + x[1] * x[1]).unwrap();
        let c = decay_counts(&v, 0.5, 4, None).unwrap();
        assert!(c.iter().all(|c| c.points == 0));
        let e = Ellipticity::new(2, 2.0, 1).unwrap();
        assert!(matches!(decay_experiment(&v, 0.5, 4, &e), Err(Error::DegenerateData(_))));
    }

    #[test]
    fn paraboloid_threshold() {
        let spec = GridSpec::cube(2, 17, 1.0).unwrap();
        let a0 = 3.0;
        let v = GridFunction::from_fn(spec, |x| -0.5 * a0 * (x[0] * x[0] + x[1] * x[1])).unwrap();
        let c = decay_counts(&v, 1.0, 3, Some(1e-9)).unwrap();
        // openings 1, 2, 4, 8: everything interior misses contact until 4 > 3
        assert!(c[0].points > 0 && c[1].points > 0);
        assert_eq!(c[2].points, 0);
        assert_eq!(c[3].points, 0);
        assert!(c.windows(2).all(|w| w[1].points <= w[0].points));
    }

    #[test]
    fn ratio_formula() {
        let e = Ellipticity::new(2, 2.0, 1).unwrap();
        assert!((theoretical_ratio(&e, 1.0).unwrap() - (1.0 - 0.5 * 0.25)).abs() < 1e-15);
    }
}
