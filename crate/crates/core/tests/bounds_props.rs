use proptest::prelude::*;
use w2eps::bounds::{
    ass_conjecture, closed_form_lower, epsilon_interior, epsilon_upper, exponent_report, f_lower, gamma_star, phi,
    rho_for_beta, t0_maximizer, Ellipticity,
};
use w2eps::lambert::{lambert_w0, lambert_wm1, wm1_envelope_bounds, INV_E};

proptest! {
    #[test]
    fn w0_round_trip_and_monotone(z in -0.367f64..1e6, dz in 1e-6f64..1.0) {
        let w = lambert_w0(z).unwrap().value;
        prop_assert!((w * w.exp() - z).abs() <= 1e-12 * z.abs().max(1.0));
        prop_assert!(lambert_w0(z + dz).unwrap().value > w);
    }

    #[test]
    fn wm1_round_trip_and_monotone(t in 1e-9f64..0.999) {
        let z = -INV_E * t;
        let w = lambert_wm1(z).unwrap().value;
        prop_assert!((w * w.exp() - z).abs() <= 1e-12);
        prop_assert!(w <= -1.0);
        // decreasing on [-1/e, 0)
        let w2 = lambert_wm1(z * 0.999).unwrap().value;
        prop_assert!(w2 < w);
    }

    #[test]
    fn lower_branch_bracket(u in 0.0f64..50.0) {
        let (lo, hi) = wm1_envelope_bounds(u).unwrap();
        let w = lambert_wm1(-(-u - 1.0).exp()).unwrap().value;
        prop_assert!(lo <= w + 1e-12 && w <= hi + 1e-12);
    }

    #[test]
    fn t0_decreases_with_ratio(n in 2usize..30, r in 1.01f64..100.0, dr in 0.01f64..10.0) {
        let a = t0_maximizer(n, r).unwrap();
        let b = t0_maximizer(n, r + dr).unwrap();
        prop_assert!(b.t0 < a.t0);
        prop_assert!(a.t0 < n as f64 && a.t0 > 0.0);
    }

    #[test]
    fn beta_inverts_t0(n in 2usize..40, frac in 0.01f64..1.0) {
        let beta = 1.0 + frac * (n as f64 - 1.0);
        let r = rho_for_beta(n, beta).unwrap();
        let t0 = t0_maximizer(n, r).unwrap().t0;
        prop_assert!((t0 - n as f64 / beta).abs() <= 1e-8 * (n as f64 / beta));
    }

    #[test]
    fn bound_chain(n in 3usize..15, ratio in 1.0f64..20.0, kf in 0.0f64..1.0) {
        let k = 1 + ((n - 2) as f64 * kf) as usize;
        let e = Ellipticity::new(n, ratio, k).unwrap();
        let r = exponent_report(&e).unwrap();
        prop_assert_eq!(r.f_at_gamma_star, f_lower(gamma_star(n).unwrap(), r.c_star, n));
        prop_assert!(closed_form_lower(&e).unwrap() <= r.f_at_gamma_star + 1e-15);
        prop_assert!(r.f_at_gamma_star <= epsilon_interior(&e).unwrap().epsilon + 1e-12);
        prop_assert!(r.epsilon_interior <= r.epsilon_upper);
        prop_assert!(r.epsilon_upper <= ass_conjecture(ratio).unwrap() + 1e-15);
        prop_assert!(r.epsilon_global <= r.epsilon_interior);
        prop_assert!(r.stationarity_residual <= 1e-9);
        prop_assert_eq!(epsilon_upper(n, ratio).unwrap(), r.epsilon_upper);
    }

    #[test]
    fn phi_is_below_its_maximum(n in 2usize..12, ratio in 1.01f64..20.0, g in 0.01f64..0.999) {
        let e = Ellipticity::new(n, ratio, 1).unwrap();
        let eps = epsilon_interior(&e).unwrap().epsilon;
        prop_assert!(phi(g, w2eps::bounds::pucci_c(&e).unwrap(), n).unwrap() <= eps + 1e-10);
    }
}

#[test]
fn report_serializes_and_round_trips() {
    let r = exponent_report(&Ellipticity::new(5, 3.0, 2).unwrap()).unwrap();
    let text = serde_json::to_string(&r).unwrap();
    let back: w2eps::bounds::ExponentReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, r);
}
