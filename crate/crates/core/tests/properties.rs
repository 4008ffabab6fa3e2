//! Property tests for the exact identities and invariants of the geometric
//! primitives.

use num_complex::Complex64;
use proptest::prelude::*;
use teichkit::beltrami::{p_norm, BeltramiField};
use teichkit::grid::{
    hyperbolic_density_disk, hyperbolic_density_exterior, log_log_slope_fit, reflect, GridSpec,
};
use teichkit::mobius::{classify, translation_length, MobiusMap};

fn arb_nonzero() -> impl Strategy<Value = Complex64> {
    (
        prop::num::f64::NORMAL.prop_filter("bounded", |v| v.abs() > 1e-6 && v.abs() < 1e6),
        prop::num::f64::NORMAL.prop_filter("bounded", |v| v.abs() > 1e-6 && v.abs() < 1e6),
    )
        .prop_map(|(re, im)| Complex64::new(re, im))
}

fn arb_disk_mobius() -> impl Strategy<Value = MobiusMap> {
    (0.0..0.85f64, 0.0..std::f64::consts::TAU, 0.0..std::f64::consts::TAU)
        .prop_map(|(r, t, phi)| {
            MobiusMap::from_center_rotation(Complex64::from_polar(r, t), phi).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reflection_is_an_involution_fixing_the_circle(z in arb_nonzero()) {
        let back = reflect(reflect(z).unwrap()).unwrap();
        prop_assert!((back - z).norm() <= 1e-12 * z.norm().max(1.0));
    }

    #[test]
    fn density_identities(r in 1e-6..0.999_999f64, t in 0.0..std::f64::consts::TAU) {
        let z = Complex64::from_polar(r, t);
        let rho = hyperbolic_density_disk(z).unwrap();
        prop_assert!((rho * (1.0 - z.norm_sqr()) - 2.0).abs() < 1e-12);
        let w = Complex64::from_polar(1.0 / r, t);
        let rho = hyperbolic_density_exterior(w).unwrap();
        prop_assert!((rho * (w.norm_sqr() - 1.0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn slope_fit_recovers_exact_power_laws(
        expo in -3.0..3.0f64,
        scale in 0.01..100.0f64,
    ) {
        let pairs: Vec<(f64, f64)> = (0..6)
            .map(|j| {
                let eps = 0.2 * 0.5f64.powi(j);
                (eps, scale * eps.powf(expo))
            })
            .collect();
        let (slope, r2) = log_log_slope_fit(&pairs).unwrap();
        prop_assert!((slope - expo).abs() < 1e-9, "slope {slope} vs {expo}");
        prop_assert!(r2 > 1.0 - 1e-9);
    }

    #[test]
    fn mobius_group_axioms(
        f in arb_disk_mobius(),
        g in arb_disk_mobius(),
        h in arb_disk_mobius(),
        zr in 0.0..0.9f64,
        zt in 0.0..std::f64::consts::TAU,
    ) {
        let z = Complex64::from_polar(zr, zt);
        let assoc_l = f.compose(&g).compose(&h).apply(z);
        let assoc_r = f.compose(&g.compose(&h)).apply(z);
        prop_assert!((assoc_l - assoc_r).norm() < 1e-12);
        let id = f.compose(&f.inverse()).apply(z);
        prop_assert!((id - z).norm() < 1e-12);
        // disk preservation
        prop_assert!(f.apply(z).norm() < 1.0);
        // boundary preservation
        let b = Complex64::from_polar(1.0, zt);
        prop_assert!((f.apply(b).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn translation_length_is_conjugacy_invariant(
        c in 0.05..0.9f64,
        g in arb_disk_mobius(),
    ) {
        let gamma = MobiusMap::hyperbolic_axis_real(c).unwrap();
        let conj = gamma.conjugate_by(&g);
        prop_assert_eq!(classify(&gamma), classify(&conj));
        let l0 = translation_length(&gamma).unwrap();
        let l1 = translation_length(&conj).unwrap();
        prop_assert!((l0 - l1).abs() < 1e-10);
        prop_assert_eq!(classify(&conj), classify(&conj.inverse()));
    }
}

proptest! {
    // the quadrature-backed checks are heavier, keep the case count low
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn p_norm_monotone_under_scalar_domination(
        k in 0.05..0.3f64,
        s in 0.1..0.9f64,
        p in 1.0..4.0f64,
    ) {
        let spec = GridSpec::coarse();
        let big = BeltramiField::from_fn(spec.clone(), |z| {
            Complex64::new(k * (1.0 - z.norm_sqr()).powi(2), 0.0)
        })
        .unwrap();
        let small = BeltramiField::from_fn(spec, |z| {
            Complex64::new(s * k * (1.0 - z.norm_sqr()).powi(2), 0.0)
        })
        .unwrap();
        let a = p_norm(&small, p).unwrap().finite().unwrap();
        let b = p_norm(&big, p).unwrap().finite().unwrap();
        prop_assert!(a <= b + 1e-12);
    }
}
