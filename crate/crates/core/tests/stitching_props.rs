mod common;

use gabor_phase::engine::{
    masked_norm, quadrature_gabor, spectrogram, CoverageMask, Grid2D, Norm, SpectrogramField,
};
use gabor_phase::geometry::{Region, Shape, Square, SquareCover};
use gabor_phase::signal::{gabor_closed_form, GaussianMixtureSignal};
use gabor_phase::stitching::{local_align, min_phase_distance, retrieve_phase, JetSource};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

fn residual(f: &[Complex64], g: &[Complex64], z: Complex64, mask: &CoverageMask) -> f64 {
    mask.entries()
        .iter()
        .map(|&(i, w)| (g[i] - z * f[i]).norm_sqr() * w)
        .sum::<f64>()
        .sqrt()
}

fn closed_field(sig: &GaussianMixtureSignal, grid: Grid2D) -> SpectrogramField {
    SpectrogramField::from_fn(grid, |x, y| gabor_closed_form(sig, x, y))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn retrieval_is_gauge_covariant(sig in common::mixture_strategy(2, 0.4), theta in 0.0..std::f64::consts::TAU) {
        let cover = SquareCover::grid((0.0, 0.0), 2, 2, 0.5).unwrap();
        let region = cover.region();
        let grid = Grid2D::enclosing(&region.bbox(), 0.05).unwrap();
        let rotated = sig.scaled(Complex64::from_polar(1.0, theta));
        let s = spectrogram(&closed_field(&sig, grid)).unwrap();
        let s_rot = spectrogram(&closed_field(&rotated, grid)).unwrap();
        let a = retrieve_phase(&s, &cover, JetSource::Analytic(&sig), 14);
        let b = retrieve_phase(&s_rot, &cover, JetSource::Analytic(&rotated), 14);
        prop_assume!(a.is_ok());
        let (a, b) = (a.unwrap(), b.unwrap());
        let (fa, fb) = (a.field().unwrap(), b.field().unwrap());
        let norm = gabor_phase::engine::region_norm(fa, &region, Norm::L2).unwrap();
        let (_, d) = min_phase_distance(fa, fb, &region).unwrap();
        prop_assert!(d <= 1e-8 * norm, "relative distance {}", d / norm);
    }

    #[test]
    fn local_alignment_is_optimal(
        f in common::mixture_strategy(3, 1.0),
        g in common::mixture_strategy(3, 1.0),
        c in (-0.5..0.5f64, -0.5..0.5f64),
    ) {
        let square = Square::unit(c.0, c.1);
        let grid = Grid2D::enclosing(&square.bbox(), 0.05).unwrap();
        let (ff, gg) = (closed_field(&f, grid), closed_field(&g, grid));
        let al = local_align(&ff, &gg, &square, 0).unwrap();
        let mask = CoverageMask::square(&grid, &square).unwrap();
        let (fv, gv) = (ff.gabor_values().unwrap(), gg.gabor_values().unwrap());
        let base = residual(fv, gv, al.z, &mask);
        prop_assert!((base - al.residual).abs() <= 1e-12 * (1.0 + base));
        for dir in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(-1.0, 0.0), Complex64::new(0.0, -1.0)] {
            prop_assert!(residual(fv, gv, al.z + 1e-3 * dir, &mask) >= base * (1.0 - 1e-14));
        }
    }

    #[test]
    fn closed_form_phase_beats_angle_grid(
        f in common::mixture_strategy(3, 1.0),
        g in common::mixture_strategy(3, 1.0),
    ) {
        let square = Square::unit(0.2, -0.1);
        let grid = Grid2D::enclosing(&square.bbox(), 0.05).unwrap();
        let (ff, gg) = (closed_field(&f, grid), closed_field(&g, grid));
        let (_, d) = min_phase_distance(&ff, &gg, &Region::single(square)).unwrap();
        let mask = CoverageMask::square(&grid, &square).unwrap();
        let (fv, gv) = (ff.gabor_values().unwrap(), gg.gabor_values().unwrap());
        for k in 0..720 {
            let tau = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / 720.0);
            prop_assert!(d <= residual(fv, gv, tau, &mask) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn unimodular_constraint_costs_at_most_modulus_gap(
        f in common::mixture_strategy(3, 1.0),
        g in common::mixture_strategy(3, 1.0),
    ) {
        let square = Square::unit(0.0, 0.0);
        let grid = Grid2D::enclosing(&square.bbox(), 0.05).unwrap();
        let (ff, gg) = (closed_field(&f, grid), closed_field(&g, grid));
        let (_, d) = min_phase_distance(&ff, &gg, &Region::single(square)).unwrap();
        let al = local_align(&ff, &gg, &square, 0).unwrap();
        let mask = CoverageMask::square(&grid, &square).unwrap();
        let (fv, gv) = (ff.gabor_values().unwrap(), gg.gabor_values().unwrap());
        let modulus_gap = mask
            .entries()
            .iter()
            .map(|&(i, w)| (gv[i].norm() - fv[i].norm()).powi(2) * w)
            .sum::<f64>()
            .sqrt();
        prop_assert!(d <= 2f64.sqrt() * al.residual + modulus_gap + 1e-12);
    }
}

/// Largest `|c₁ - c₂|² ‖Gf‖⁴_{L²(Q₁∩Q₂)} / (K ‖Sf - Sg‖_{L²(Q₁∪Q₂)})` over the pairs.
fn overlap_constant(
    pairs: &[(GaussianMixtureSignal, GaussianMixtureSignal, Square, Square)],
    step: f64,
) -> f64 {
    let mut best: f64 = 0.0;
    for (f, g, q1, q2) in pairs {
        let both = [*q1, *q2];
        let region = Region::new(both.to_vec()).unwrap();
        let grid = Grid2D::enclosing(&region.bbox(), step).unwrap();
        let (gf, gg) = (
            quadrature_gabor(f, &grid).unwrap(),
            quadrature_gabor(g, &grid).unwrap(),
        );
        let (sf, sg) = (spectrogram(&gf).unwrap(), spectrogram(&gg).unwrap());
        let (c1, _) = min_phase_distance(&gf, &gg, &Region::single(*q1)).unwrap();
        let (c2, _) = min_phase_distance(&gf, &gg, &Region::single(*q2)).unwrap();
        let cap = CoverageMask::new(&grid, Shape::Intersection(q1, q2)).unwrap();
        let union = CoverageMask::new(&grid, Shape::Union(&both)).unwrap();
        let overlap = masked_norm(&gf, &cap, Norm::L2);
        let k = sf.max_magnitude() + sg.max_magnitude();
        let diff = masked_norm(&sf.difference(&sg).unwrap(), &union, Norm::L2);
        best = best.max((c1 - c2).norm_sqr() * overlap.powi(4) / (k * diff));
    }
    best
}

#[test]
fn overlap_constant_is_stable_under_refinement() {
    let mut rng = common::rng(11);
    let pairs: Vec<_> = (0..30)
        .map(|_| {
            let n = rng.gen_range(1..=3);
            let f = common::random_mixture(&mut rng, n, 0.6);
            let g =
                f.plus(&common::random_mixture(&mut rng, 1, 0.6).scaled(Complex64::new(0.3, 0.0)));
            let q1 = Square::unit(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3));
            let q2 = Square::unit(
                q1.center.0 + rng.gen_range(-0.6..0.6),
                q1.center.1 + rng.gen_range(-0.6..0.6),
            );
            (f, g, q1, q2)
        })
        .collect();
    let coarse = overlap_constant(&pairs, 0.05);
    let fine = overlap_constant(&pairs, 0.025);
    assert!(coarse > 0.0);
    assert!((fine / coarse - 1.0).abs() <= 0.2, "{coarse} vs {fine}");
}
