//! Independent oracles used by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use std::f64::consts::PI;

use gabor_phase::graph::WeightedGraph;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut ChaCha8Rng, scale: f64) -> Complex64 {
    Complex64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
}

/// Points and weights of a polar rule on the disk `B_r(center)`: composite
/// 3-point Gauss in the radius, trapezoid in the angle.
pub fn disk_rule(center: Complex64, r: f64, panels: usize, angles: usize) -> Vec<(Complex64, f64)> {
    let g = [
        (-(0.6f64).sqrt(), 5.0 / 9.0),
        (0.0, 8.0 / 9.0),
        ((0.6f64).sqrt(), 5.0 / 9.0),
    ];
    let h = r / panels as f64;
    let dt = 2.0 * PI / angles as f64;
    let mut out = Vec::with_capacity(panels * 3 * angles);
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * h;
        for &(x, w) in &g {
            let rho = mid + 0.5 * h * x;
            let wr = 0.5 * h * w * rho * dt;
            for k in 0..angles {
                let t = k as f64 * dt;
                out.push((center + Complex64::from_polar(rho, t), wr));
            }
        }
    }
    out
}

/// `‖G − τF‖²` for unimodular `τ = e^{it}`.
pub fn phase_residual(f: &[Complex64], g: &[Complex64], w: &[f64], t: f64) -> f64 {
    let tau = Complex64::from_polar(1.0, t);
    f.iter()
        .zip(g)
        .zip(w)
        .map(|((a, b), w)| (b - tau * a).norm_sqr() * w)
        .sum()
}

/// `min_τ ‖G − τF‖` by a 720-angle scan followed by golden-section refinement.
pub fn min_tau_distance(f: &[Complex64], g: &[Complex64], w: &[f64]) -> f64 {
    let n = 720;
    let step = 2.0 * PI / n as f64;
    let (mut best_t, mut best) = (0.0, f64::INFINITY);
    for k in 0..n {
        let t = k as f64 * step;
        let v = phase_residual(f, g, w, t);
        if v < best {
            best = v;
            best_t = t;
        }
    }
    let (mut a, mut b) = (best_t - step, best_t + step);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if phase_residual(f, g, w, c) < phase_residual(f, g, w, d) {
            b = d;
        } else {
            a = c;
        }
    }
    best.min(phase_residual(f, g, w, 0.5 * (a + b)))
        .max(0.0)
        .sqrt()
}

/// Uniform sample from the disk `B_r(0)`.
pub fn disk_sample(rng: &mut ChaCha8Rng, r: f64) -> Complex64 {
    let rho = r * rng.gen::<f64>().sqrt();
    Complex64::from_polar(rho, 2.0 * PI * rng.gen::<f64>())
}

pub fn poly_eval(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
}

/// Monte-Carlo estimate and standard error of `‖F⊗F̄ − G⊗Ḡ‖²_{L²(B_r×B_r)}`.
pub fn tensor_distance_mc(
    f: &[Complex64],
    g: &[Complex64],
    r: f64,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> (f64, f64) {
    let vol = (PI * r * r).powi(2);
    let (mut mean, mut m2) = (0.0, 0.0);
    for k in 0..samples {
        let z = disk_sample(rng, r);
        let zeta = disk_sample(rng, r);
        let v = (poly_eval(f, z) * poly_eval(f, zeta).conj()
            - poly_eval(g, z) * poly_eval(g, zeta).conj())
        .norm_sqr();
        let d = v - mean;
        mean += d / (k + 1) as f64;
        m2 += d * (v - mean);
    }
    let var = m2 / (samples - 1) as f64;
    (vol * mean, vol * (var / samples as f64).sqrt())
}

/// Cheeger constant by enumerating every nonempty proper subset.
pub fn brute_cheeger(g: &WeightedGraph) -> f64 {
    let n = g.len();
    let w = g.weights();
    let s = g.sigma();
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << n) - 1 {
        let inside = |i: usize| mask >> i & 1 == 1;
        let mut cut = 0.0;
        let (mut wi, mut wo) = (0.0, 0.0);
        for i in 0..n {
            if inside(i) {
                wi += w[i];
                for j in 0..n {
                    if !inside(j) {
                        cut += s[i][j];
                    }
                }
            } else {
                wo += w[i];
            }
        }
        best = best.min(cut / wi.min(wo));
    }
    best
}

/// `min x·Lx / x·Wx` over `x ⊥_W 1`, by steepest descent with a two-dimensional
/// Rayleigh–Ritz step.
pub fn rayleigh_min(g: &WeightedGraph, iterations: usize, rng: &mut ChaCha8Rng) -> f64 {
    let n = g.len();
    let w = g.weights();
    let s = g.sigma();
    let lap = |x: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| (0..n).map(|j| s[i][j] * (x[i] - x[j])).sum())
            .collect()
    };
    let dot_w = |a: &[f64], b: &[f64]| -> f64 { (0..n).map(|i| a[i] * b[i] * w[i]).sum() };
    let dot = |a: &[f64], b: &[f64]| -> f64 { (0..n).map(|i| a[i] * b[i]).sum() };
    let wsum: f64 = w.iter().sum();
    let project = |x: &mut Vec<f64>| {
        let m = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / wsum;
        x.iter_mut().for_each(|v| *v -= m);
        let nrm = dot_w(x, x).sqrt();
        x.iter_mut().for_each(|v| *v /= nrm);
    };
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    project(&mut x);
    let mut rho = dot(&x, &lap(&x));
    for _ in 0..iterations {
        let lx = lap(&x);
        // W-gradient of the quotient
        let mut r: Vec<f64> = (0..n).map(|i| lx[i] / w[i] - rho * x[i]).collect();
        let m = r.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / wsum;
        r.iter_mut().for_each(|v| *v -= m);
        let rn = dot_w(&r, &r).sqrt();
        if rn < 1e-15 {
            break;
        }
        r.iter_mut().for_each(|v| *v /= rn);
        // Rayleigh–Ritz on span{x, r} with x, r W-orthonormal up to rounding
        let c = dot_w(&x, &r);
        r.iter_mut().zip(&x).for_each(|(v, xi)| *v -= c * xi);
        let rn = dot_w(&r, &r).sqrt();
        if rn < 1e-15 {
            break;
        }
        r.iter_mut().for_each(|v| *v /= rn);
        let lr = lap(&r);
        let (a, b, d) = (rho, dot(&x, &lr), dot(&r, &lr));
        let mu = 0.5 * (a + d) - (0.25 * (a - d).powi(2) + b * b).sqrt();
        let (cx, cr) = if b.abs() > 0.0 {
            (b, mu - a)
        } else if a <= d {
            (1.0, 0.0)
        } else {
            (0.0, 1.0)
        };
        let mut next: Vec<f64> = (0..n).map(|i| cx * x[i] + cr * r[i]).collect();
        project(&mut next);
        x = next;
        rho = dot(&x, &lap(&x));
    }
    rho
}

/// `∫_{-s}^{s} x^d dx`.
pub fn monomial_integral(d: usize, s: f64) -> f64 {
    if d % 2 == 1 {
        0.0
    } else {
        2.0 * s.powi(d as i32 + 1) / (d + 1) as f64
    }
}

/// `|P_N(z)|` by the three-term recurrence.
pub fn legendre_abs(n: usize, z: Complex64) -> f64 {
    let (mut p0, mut p1) = (Complex64::new(1.0, 0.0), z);
    if n == 0 {
        return 1.0;
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    p1.norm()
}

/// Mixtures of up to `max_atoms` atoms with shifts and modulations in `[-spread, spread]`.
pub fn mixture_strategy(
    max_atoms: usize,
    spread: f64,
) -> impl proptest::strategy::Strategy<Value = gabor_phase::signal::GaussianMixtureSignal> {
    use gabor_phase::signal::{GaussianAtom, GaussianMixtureSignal};
    use proptest::prelude::*;
    prop::collection::vec(
        (-1.0..1.0f64, -1.0..1.0f64, -spread..spread, -spread..spread),
        1..=max_atoms,
    )
    .prop_filter_map("vanishing mixture", |atoms| {
        let atoms = atoms
            .into_iter()
            .map(|(re, im, t, n)| GaussianAtom::new(Complex64::new(re, im), t, n).unwrap())
            .collect();
        let sig = GaussianMixtureSignal::new(atoms).ok()?;
        (sig.l2_norm() > 1e-3).then_some(sig)
    })
}

/// Random mixture with `atoms` atoms, shifts and modulations in `[-spread, spread]`.
pub fn random_mixture(
    rng: &mut ChaCha8Rng,
    atoms: usize,
    spread: f64,
) -> gabor_phase::signal::GaussianMixtureSignal {
    use gabor_phase::signal::{GaussianAtom, GaussianMixtureSignal};
    let atoms = (0..atoms)
        .map(|_| {
            GaussianAtom::new(
                random_complex(rng, 1.0),
                rng.gen_range(-spread..spread),
                rng.gen_range(-spread..spread),
            )
            .unwrap()
        })
        .collect();
    GaussianMixtureSignal::new(atoms).unwrap()
}
