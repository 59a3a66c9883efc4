mod common;

use common::*;
use proptest::prelude::*;
use w2eps::bounds::Ellipticity;
use w2eps::counterexample::{build_v, RadialProfile};
use w2eps::decay::decay_experiment;
use w2eps::envelope::a_convex_envelope;
use w2eps::grid::{GridFunction, GridSpec};
use w2eps::theta::{tail_distribution, theta_field, theta_field_bisection, ThetaField};

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let spec = GridSpec::cube(2, 33, 1.0).unwrap();
    let v = random_smooth(&spec, 5);
    let one = in_pool(1, || (theta_field(&v, 50.0).unwrap(), a_convex_envelope(&v, 2.0, None).unwrap()));
    let four = in_pool(4, || (theta_field(&v, 50.0).unwrap(), a_convex_envelope(&v, 2.0, None).unwrap()));
    let bits = |x: &[f64]| x.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&one.0.theta), bits(&four.0.theta));
    assert_eq!(bits(&one.1.envelope), bits(&four.1.envelope));
    assert_eq!(one.1.contact_mask, four.1.contact_mask);
}

#[test]
fn convex_data_has_vanishing_theta() {
    let spec = GridSpec::cube(2, 33, 1.0).unwrap();
    let v = GridFunction::from_fn(spec.clone(), |x| (x[0] - 0.2).powi(2) + 0.5 * x[1] * x[1] + x[0].exp()).unwrap();
    let f = theta_field(&v, 10.0).unwrap();
    assert!(spec.domain_points().iter().all(|&i| f.converged[i] && f.theta[i] <= 1e-9));
}

#[test]
fn bisection_agrees_with_exact_field() {
    let spec = GridSpec::cube(2, 17, 1.0).unwrap();
    let v = random_smooth(&spec, 9);
    let exact = theta_field(&v, 40.0).unwrap();
    let bis = theta_field_bisection(&v, 40.0, 1e-7, 1e-10).unwrap();
    for i in spec.domain_points() {
        if exact.converged[i] {
            assert!((exact.theta[i] - bis.theta[i]).abs() < 1e-5 * (1.0 + exact.theta[i]), "point {i}");
        }
    }
}

#[test]
fn constant_theta_tail_is_a_step() {
    let spec = GridSpec::cube(2, 41, 1.0).unwrap();
    let n = spec.len();
    let field = ThetaField {
        theta: (0..n).map(|i| if spec.inside(i) { 3.0 } else { f64::NAN }).collect(),
        converged: vec![true; n],
        lower: vec![3.0; n],
        upper: vec![3.0; n],
        boundary: vec![false; n],
        a_max: 10.0,
    };
    let ball = (0..n).filter(|&i| spec.inside(i) && spec.within(0.5, i)).count() as f64 * spec.cell_measure();
    let tail = tail_distribution(&field, &spec, 0.5, &[1.0, 2.9, 3.0, 4.0]).unwrap();
    assert_eq!(tail.iter().map(|p| p.1).collect::<Vec<_>>(), vec![ball, ball, 0.0, 0.0]);
    // an even grid has no sample within half a cell of the centre
    let even = GridSpec::cube(2, 40, 1.0).unwrap();
    let m = even.len();
    let field = ThetaField {
        theta: vec![3.0; m],
        converged: vec![true; m],
        lower: vec![3.0; m],
        upper: vec![3.0; m],
        boundary: vec![false; m],
        a_max: 10.0,
    };
    let none = tail_distribution(&field, &even, 0.4 * even.spacing, &[1.0, 2.0]).unwrap();
    assert!(none.iter().all(|p| p.1 == 0.0));
}

#[test]
fn counterexample_decay_is_at_least_the_guaranteed_rate() {
    let spec = GridSpec::cube(2, 129, 1.0).unwrap();
    let p = RadialProfile::new(3, 3.0, 0.125, 1.0, 2.0).unwrap();
    let v = build_v(&p, &spec).unwrap().grid;
    let e = Ellipticity::new(2, 2.0, 1).unwrap();
    let rep = decay_experiment(&v, 1.0, 6, &e).unwrap();
    assert!(rep.counts.windows(2).all(|w| w[1].points <= w[0].points));
    assert!(
        rep.empirical_ratio <= rep.theoretical_ratio,
        "empirical {} vs guaranteed {}",
        rep.empirical_ratio,
        rep.theoretical_ratio
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn theta_is_monotone_in_data(seed in 0u64..1000, ci in 5usize..10, cj in 5usize..10, push in 0.1f64..3.0) {
        let spec = GridSpec::cube(2, 15, 1.0).unwrap();
        let v2 = random_smooth(&spec, seed);
        let k = spec.ravel(&[ci, cj]);
        let x0 = spec.coords(k);
        // v1 <= v2 with equality at x0
        let values = (0..spec.len())
            .map(|i| {
                let x = spec.coords(i);
                let d2 = (x[0] - x0[0]).powi(2) + (x[1] - x0[1]).powi(2);
                v2.values[i] - push * d2 * (1.0 + (3.0 * x[0]).sin().powi(2))
            })
            .collect();
        let v1 = v2.with_values(values).unwrap();
        let t1 = theta_field(&v1, 1e3).unwrap();
        let t2 = theta_field(&v2, 1e3).unwrap();
        prop_assume!(t1.converged[k] && t2.converged[k]);
        prop_assert!(t1.theta[k] >= t2.theta[k] - 1e-9 * (1.0 + t2.theta[k]));
    }
}
