mod common;

use common::*;
use proptest::prelude::*;
use w2eps::envelope::{a_convex_envelope, convex_envelope, default_tolerance};
use w2eps::grid::{GridFunction, GridSpec};

fn scaled(v: &GridFunction, beta: f64, gamma: f64) -> GridFunction {
    let spec = &v.spec;
    let values = (0..spec.len())
        .map(|i| {
            let x = spec.coords(i);
            let sq: f64 = x[..spec.dim].iter().map(|c| c * c).sum();
            beta * v.values[i] + 0.5 * gamma * sq
        })
        .collect();
    v.with_values(values).unwrap()
}

#[test]
fn random_noise_matches_oracle() {
    for seed in 0..3 {
        let v = random_grid(21, seed);
        for a in [0.0, 1.5, 7.0] {
            let env = a_convex_envelope(&v, a, None).unwrap();
            let err = max_abs_diff(&env.envelope, &oracle_envelope(&v, a), &v.spec);
            assert!(err < 1e-9, "seed {seed} a {a}: {err}");
        }
    }
}

#[test]
fn smooth_3d_matches_oracle() {
    let spec = GridSpec::cube(3, 9, 1.0).unwrap();
    let v = random_smooth(&spec, 11);
    let env = a_convex_envelope(&v, 2.0, None).unwrap();
    let err = max_abs_diff(&env.envelope, &oracle_envelope(&v, 2.0), &spec);
    assert!(err < 1e-9, "{err}");
}

#[test]
fn bump_contact_set_matches_oracle() {
    let spec = GridSpec::cube(2, 41, 1.0).unwrap();
    let v = capped_bump(&spec, 1.0, 0.9, 1.0);
    let a = 4.0;
    let env = a_convex_envelope(&v, a, None).unwrap();
    let oracle = oracle_envelope(&v, a);
    let tol = default_tolerance(spec.spacing, a);
    let mut contact = 0;
    for i in spec.domain_points() {
        let gap = v.values[i] - oracle[i];
        if (gap - tol).abs() > 1e-9 {
            assert_eq!(env.contact_mask[i], gap <= tol, "point {i}");
        }
        contact += env.contact_mask[i] as usize;
    }
    assert!(contact > 0 && contact < spec.domain_points().len());
}

#[test]
fn envelope_of_zero_and_paraboloid() {
    let spec = GridSpec::cube(2, 21, 1.0).unwrap();
    let zero = GridFunction::from_fn(spec.clone(), |_| 0.0).unwrap();
    let e = a_convex_envelope(&zero, 3.0, None).unwrap();
    let worst = spec.domain_points().iter().map(|&i| e.envelope[i].abs()).fold(0.0, f64::max);
    // the solver resolves tight rows to 1e-11 relative; w = 1.5|x|² has size 1.5
    assert!(worst < 1e-11 * 1.5, "{worst}");
    assert!(spec.domain_points().iter().all(|&i| e.contact_mask[i]));

    let a0 = 4.0;
    let v = GridFunction::from_fn(spec.clone(), |x| -0.5 * a0 * (x[0] * x[0] + x[1] * x[1])).unwrap();
    let full = a_convex_envelope(&v, a0, Some(1e-9)).unwrap();
    assert!(spec.domain_points().iter().all(|&i| full.contact_mask[i]));
    let half = a_convex_envelope(&v, a0 / 2.0, Some(1e-9)).unwrap();
    for i in spec.domain_points() {
        if half.contact_mask[i] {
            assert!(!spec.is_interior(i), "interior contact at {i}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn scaling_identity(seed in 0u64..1000, beta in 0.2f64..5.0, gamma in 0.0f64..4.0, lambda in 0.0f64..6.0, two_d in any::<bool>()) {
        let spec = if two_d { GridSpec::cube(2, 15, 1.0).unwrap() } else { GridSpec::cube(1, 61, 1.0).unwrap() };
        let v = random_smooth(&spec, seed);
        let lhs = a_convex_envelope(&scaled(&v, beta, gamma), lambda, None).unwrap();
        let inner = a_convex_envelope(&v, (lambda + gamma) / beta, None).unwrap();
        let rhs = scaled(&v.with_values(inner.envelope).unwrap(), beta, gamma);
        let scale = spec.domain_points().iter().fold(1.0f64, |s, &i| s.max(lhs.envelope[i].abs()));
        prop_assert!(max_abs_diff(&lhs.envelope, &rhs.values, &spec) <= 1e-8 * scale);
    }

    #[test]
    fn ordering_in_opening(seed in 0u64..1000, a in 0.0f64..5.0, extra in 0.0f64..5.0) {
        let spec = GridSpec::cube(2, 15, 1.0).unwrap();
        let v = random_smooth(&spec, seed);
        let tol = 1e-6;
        let ea = a_convex_envelope(&v, a, Some(tol)).unwrap();
        let eb = a_convex_envelope(&v, a + extra, Some(tol)).unwrap();
        for i in spec.domain_points() {
            prop_assert!(ea.envelope[i] <= eb.envelope[i] + 1e-12);
            prop_assert!(eb.envelope[i] <= v.values[i] + 1e-12);
            prop_assert!(!ea.contact_mask[i] || eb.contact_mask[i]);
        }
    }

    #[test]
    fn convex_envelope_is_idempotent(seed in 0u64..1000) {
        let spec = GridSpec::cube(2, 15, 1.0).unwrap();
        let w = random_smooth(&spec, seed);
        let once = convex_envelope(&w).unwrap();
        let twice = convex_envelope(&once).unwrap();
        prop_assert!(max_abs_diff(&once.values, &twice.values, &spec) < 1e-12);
    }
}
