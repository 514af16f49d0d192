mod common;

use std::f64::consts::PI;

use gabor_phase::engine::{quadrature_gabor, Grid2D};
use gabor_phase::signal::{
    entire_extension, entire_extension_bound, gabor_closed_form, make_sharpness_pair,
    EntireExtensionParams,
};
use num_complex::Complex64;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn quadrature_matches_closed_form(
        sig in common::mixture_strategy(4, 2.0),
        x in -3.0..3.0f64,
        y in -3.0..3.0f64,
    ) {
        let grid = Grid2D::new(x, y, 1.0, 1.0, 1, 1).unwrap();
        let q = quadrature_gabor(&sig, &grid).unwrap().gabor_values().unwrap()[0];
        let err = (q - gabor_closed_form(&sig, x, y)).norm();
        prop_assert!(err <= 1e-8 * (1.0 + sig.l2_norm()), "error {err:e}");
    }

    #[test]
    fn extension_restricts_to_gabor(
        sig in common::mixture_strategy(4, 2.0),
        x in -3.0..3.0f64,
        y in -3.0..3.0f64,
    ) {
        let p = EntireExtensionParams { z: Complex64::new(x, 0.0), zeta: Complex64::new(y, 0.0) };
        let err = (entire_extension(&sig, p) - gabor_closed_form(&sig, x, y)).norm();
        prop_assert!(err <= 1e-12 * (1.0 + sig.l2_norm()));
    }

    #[test]
    fn extension_growth_bound(
        sig in common::mixture_strategy(4, 2.0),
        z in (-3.0..3.0f64, -2.0..2.0f64),
        zeta in (-3.0..3.0f64, -2.0..2.0f64),
    ) {
        let p = EntireExtensionParams { z: Complex64::new(z.0, z.1), zeta: Complex64::new(zeta.0, zeta.1) };
        let v = entire_extension(&sig, p).norm();
        let b = entire_extension_bound(sig.l2_norm(), p);
        prop_assert!(v <= b * (1.0 + 1e-12), "|Tf| = {v:e} > {b:e}");
    }
}

#[test]
fn sharpness_modulus_factorises() {
    for a in [0.5, 1.0, 1.5] {
        let (f, _) = make_sharpness_pair(a).unwrap();
        for i in 0..21 {
            for j in 0..21 {
                let x = -1.0 + 0.1 * i as f64;
                let y = -1.0 + 0.1 * j as f64;
                let zbar = Complex64::new(x, -y);
                let expected = (-0.5 * PI * (a * a + x * x + y * y)).exp()
                    * (Complex64::i() * a * PI * zbar).cos().norm();
                let got = gabor_closed_form(&f, x, y).norm();
                assert!((got - expected).abs() <= 1e-10, "a={a} at ({x}, {y})");
            }
        }
    }
}
