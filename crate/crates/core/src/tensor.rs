//! Local recovery of `F ⊗ F̄` from derivatives of `|F|²`.
//!
//! For holomorphic `F`, `∂̄^l ∂^k |F|² = F^{(k)} · conj(F^{(l)})`, so a jet of
//! `|F|²` at a point determines the Taylor coefficients of `F` there up to one
//! unimodular constant.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signal::{ExpSum, GaussianMixtureSignal};

/// Default jet order.
pub const DEFAULT_ORDER: usize = 14;
/// Default lower limit for `|F(center)|²` in [`local_phase_from_modulus`].
pub const SINGULAR_THRESHOLD: f64 = 1e-10;
/// Largest order supported by finite-difference jets.
pub const MAX_FD_ORDER: usize = 4;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `∂̄^l ∂^k |F|²` at `center` for `k, l ≤ order`, stored as `derivs[k][l]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalJet {
    pub center: Complex64,
    pub order: usize,
    pub derivs: Vec<Vec<Complex64>>,
}

impl LocalJet {
    /// Build from an explicit derivative table, checking shape and symmetry.
    pub fn new(center: Complex64, derivs: Vec<Vec<Complex64>>) -> Result<Self> {
        let n = derivs.len();
        if n == 0 || derivs.iter().any(|row| row.len() != n) {
            return Err(Error::usage("jet table must be square and nonempty"));
        }
        let scale = derivs
            .iter()
            .flatten()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
            .max(1.0);
        for k in 0..n {
            for l in 0..=k {
                if (derivs[k][l] - derivs[l][k].conj()).norm() > 1e-9 * scale {
                    return Err(Error::Invariant(format!(
                        "jet is not Hermitian at ({k}, {l})"
                    )));
                }
            }
        }
        if derivs[0][0].re < -1e-12 * scale {
            return Err(Error::Invariant(
                "jet has negative |F|^2 at its center".into(),
            ));
        }
        Ok(Self {
            center,
            order: n - 1,
            derivs,
        })
    }

    /// Jet of `|F|²` from `F(c), F'(c), …, F^{(K)}(c)`.
    pub fn from_holomorphic(center: Complex64, fk: &[Complex64]) -> Self {
        let derivs = fk
            .iter()
            .map(|a| fk.iter().map(|b| a * b.conj()).collect())
            .collect();
        Self {
            center,
            order: fk.len().saturating_sub(1),
            derivs,
        }
    }

    /// Restrict to a lower order.
    pub fn truncated(&self, order: usize) -> Self {
        let order = order.min(self.order);
        Self {
            center: self.center,
            order,
            derivs: self.derivs[..=order]
                .iter()
                .map(|row| row[..=order].to_vec())
                .collect(),
        }
    }

    /// `‖F‖²_{L²(B_r(center))} = Σ_k ω_k ∂̄^k ∂^k |F|²`, truncated at the jet order.
    pub fn disk_norm_squared(&self, r: f64) -> Result<f64> {
        let w = tensor_weights(r, self.order)?;
        Ok((0..=self.order)
            .map(|k| w.omega[k] * self.derivs[k][k].re)
            .sum())
    }

    /// Write `k,l,re,im` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "l", "re", "im"])
            .map_err(|e| Error::parse("jet csv", e.to_string()))?;
        for (k, row) in self.derivs.iter().enumerate() {
            for (l, v) in row.iter().enumerate() {
                w.serialize((k, l, v.re, v.im))
                    .map_err(|e| Error::parse("jet csv", e.to_string()))?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Jet of `|B f|²` for a mixture, where `B f` is its Fock-side representative.
pub fn jet_from_mixture(sig: &GaussianMixtureSignal, center: Complex64, order: usize) -> LocalJet {
    jet_from_expsum(&sig.bargmann(), center, order)
}

pub fn jet_from_expsum(f: &ExpSum, center: Complex64, order: usize) -> LocalJet {
    LocalJet::from_holomorphic(center, &f.derivatives(center, order))
}

/// Jet of `|p|²` for the polynomial `p(z) = Σ coeffs[j] z^j`.
pub fn jet_from_polynomial(coeffs: &[Complex64], center: Complex64, order: usize) -> LocalJet {
    let mut fk = Vec::with_capacity(order + 1);
    let mut current: Vec<Complex64> = coeffs.to_vec();
    for _ in 0..=order {
        fk.push(horner(&current, center));
        current = current
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, c)| c * j as f64)
            .collect();
    }
    LocalJet::from_holomorphic(center, &fk)
}

fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(ZERO, |acc, c| acc * z + c)
}

/// `ω_k(r) = ‖z^k‖²_{L²(B_r)} / (k!)² = π r^{2k+2} / (k! (k+1)!)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorWeights {
    pub r: f64,
    pub omega: Vec<f64>,
}

pub fn tensor_weights(r: f64, order: usize) -> Result<TensorWeights> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::domain(format!("radius must be positive, got {r}")));
    }
    let r2 = r * r;
    let mut omega = Vec::with_capacity(order + 1);
    let mut w = PI * r2;
    for k in 0..=order {
        omega.push(w);
        w *= r2 / ((k + 1) * (k + 2)) as f64;
    }
    Ok(TensorWeights { r, omega })
}

/// Truncated `δ_r(F, G)²` together with the contribution of its outermost shell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaEstimate {
    /// `Σ_{k,l ≤ K} ω_k ω_l |∂̄^l∂^k (|F|² - |G|²)|²`.
    pub squared: f64,
    /// Part of `squared` coming from `max(k, l) = K`.
    pub tail: f64,
}

impl DeltaEstimate {
    /// `δ_r(F, G)` itself.
    pub fn value(&self) -> f64 {
        self.squared.sqrt()
    }
}

/// `δ_r(F, G)² = ‖F⊗F̄ - G⊗Ḡ‖²_{L²(B_r × B_r)}` from the jets of `|F|²` and `|G|²`.
pub fn delta_r(jet_f: &LocalJet, jet_g: &LocalJet, r: f64) -> Result<DeltaEstimate> {
    if jet_f.order != jet_g.order {
        return Err(Error::usage(format!(
            "jet orders differ ({} vs {})",
            jet_f.order, jet_g.order
        )));
    }
    if (jet_f.center - jet_g.center).norm() > 1e-12 {
        return Err(Error::usage("jets have different centers"));
    }
    let w = tensor_weights(r, jet_f.order)?;
    let k_max = jet_f.order;
    let (mut squared, mut tail) = (0.0, 0.0);
    for k in 0..=k_max {
        for l in 0..=k_max {
            let d = (jet_f.derivs[k][l] - jet_g.derivs[k][l]).norm_sqr();
            let term = w.omega[k] * w.omega[l] * d;
            squared += term;
            if k.max(l) == k_max {
                tail += term;
            }
        }
    }
    Ok(DeltaEstimate { squared, tail })
}

/// `√5 · δ / ‖F‖`, an upper bound for `min_τ ‖G - τF‖_{L²(B_r)}`.
pub fn distance_from_delta(norm_f: f64, delta: f64) -> Result<f64> {
    if !(norm_f > 0.0) {
        return Err(Error::domain("the reference norm must be positive"));
    }
    Ok(5f64.sqrt() * delta / norm_f)
}

/// `r⁴ e^{8π²r²} (‖F‖²_{F∞} + ‖G‖²_{F∞}) · ‖|F|² - |G|²‖_{L²(Q)}` with unit constant.
pub fn delta_structural_bound(r: f64, fock_inf_f: f64, fock_inf_g: f64, l2diff: f64) -> f64 {
    r.powi(4)
        * (8.0 * PI * PI * r * r).exp()
        * (fock_inf_f * fock_inf_f + fock_inf_g * fock_inf_g)
        * l2diff
}

/// `F(z) e^{-i arg F(c)}` at each point, from the jet of `|F|²` at `c`.
pub fn local_phase_from_modulus(jet: &LocalJet, points: &[Complex64]) -> Result<Vec<Complex64>> {
    local_phase_from_modulus_with(jet, points, SINGULAR_THRESHOLD)
}

pub fn local_phase_from_modulus_with(
    jet: &LocalJet,
    points: &[Complex64],
    threshold: f64,
) -> Result<Vec<Complex64>> {
    let f0 = jet.derivs[0][0].re;
    if !(f0 > threshold) {
        return Err(Error::SingularCenter {
            value: f0,
            threshold,
        });
    }
    // Taylor coefficients of F(z) conj(F(c)) about c
    let mut coeffs = Vec::with_capacity(jet.order + 1);
    let mut fact = 1.0;
    for k in 0..=jet.order {
        if k > 0 {
            fact *= k as f64;
        }
        coeffs.push(jet.derivs[k][0] / fact);
    }
    let scale = 1.0 / f0.sqrt();
    Ok(points
        .iter()
        .map(|&z| horner(&coeffs, z - jet.center) * scale)
        .collect())
}

/// Finite-difference jet of a real function `U(u)` near `u = 0`.
///
/// `sample(a, b)` must return `U(a·hx + i b·hy)`; derivatives use central
/// stencils of accuracy order 6 in each axis.
pub fn fd_jet(
    center: Complex64,
    order: usize,
    hx: f64,
    hy: f64,
    sample: impl Fn(i64, i64) -> f64,
) -> Result<LocalJet> {
    if order > MAX_FD_ORDER {
        return Err(Error::domain(format!(
            "finite-difference jets support order <= {MAX_FD_ORDER}, got {order}"
        )));
    }
    if !(hx > 0.0 && hy > 0.0) {
        return Err(Error::domain("finite-difference steps must be positive"));
    }
    let max_d = 2 * order;
    let stencils_x: Vec<Vec<(i64, f64)>> = (0..=max_d).map(|d| central_stencil(d, hx)).collect();
    let stencils_y: Vec<Vec<(i64, f64)>> = (0..=max_d).map(|d| central_stencil(d, hy)).collect();
    let reach = stencil_reach(max_d);
    let width = (2 * reach + 1) as usize;
    let mut table = vec![0.0; width * width];
    for a in -reach..=reach {
        for b in -reach..=reach {
            table[((a + reach) as usize) * width + (b + reach) as usize] = sample(a, b);
        }
    }
    let at = |a: i64, b: i64| table[((a + reach) as usize) * width + (b + reach) as usize];
    let mixed = |p: usize, q: usize| -> f64 {
        let mut acc = 0.0;
        for &(a, wa) in &stencils_x[p] {
            for &(b, wb) in &stencils_y[q] {
                acc += wa * wb * at(a, b);
            }
        }
        acc
    };
    let mut partials = vec![vec![0.0; max_d + 1]; max_d + 1];
    for p in 0..=max_d {
        for q in 0..=(max_d - p) {
            partials[p][q] = mixed(p, q);
        }
    }
    let mut derivs = vec![vec![ZERO; order + 1]; order + 1];
    for (k, row) in derivs.iter_mut().enumerate() {
        for (l, entry) in row.iter_mut().enumerate() {
            // (∂X - i∂Y)^k (∂X + i∂Y)^l / 2^{k+l}, as coefficients of ∂X^{n-q} ∂Y^q
            let mut poly = vec![Complex64::new(1.0, 0.0)];
            for _ in 0..k {
                poly = mul_linear(&poly, Complex64::new(0.0, -1.0));
            }
            for _ in 0..l {
                poly = mul_linear(&poly, Complex64::new(0.0, 1.0));
            }
            let n = k + l;
            let value: Complex64 = poly
                .iter()
                .enumerate()
                .map(|(q, c)| c * partials[n - q][q])
                .sum();
            *entry = value / 2f64.powi(n as i32);
        }
    }
    for k in 0..=order {
        derivs[k][k].im = 0.0;
        for l in 0..k {
            derivs[l][k] = derivs[k][l].conj();
        }
    }
    Ok(LocalJet {
        center,
        order,
        derivs,
    })
}

/// Multiply a polynomial in `∂Y` (with `∂X` implicit) by `(∂X + c ∂Y)`.
fn mul_linear(poly: &[Complex64], c: Complex64) -> Vec<Complex64> {
    let mut out = vec![ZERO; poly.len() + 1];
    for (q, p) in poly.iter().enumerate() {
        out[q] += p;
        out[q + 1] += p * c;
    }
    out
}

fn stencil_reach(d: usize) -> i64 {
    if d == 0 {
        0
    } else {
        (d as i64 + 1) / 2 + 2
    }
}

/// Central finite-difference weights for the `d`-th derivative with step `h`.
fn central_stencil(d: usize, h: f64) -> Vec<(i64, f64)> {
    let m = stencil_reach(d);
    let nodes: Vec<f64> = (-m..=m).map(|j| j as f64).collect();
    let w = fornberg_weights(&nodes, d);
    let scale = h.powi(d as i32);
    (-m..=m)
        .zip(w)
        .filter(|(_, w)| *w != 0.0)
        .map(|(j, w)| (j, w / scale))
        .collect()
}

/// Weights of the `m`-th derivative at 0 for arbitrary distinct nodes.
fn fornberg_weights(x: &[f64], m: usize) -> Vec<f64> {
    let n = x.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = x[0];
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i];
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|row| row[m]).collect()
}

/// `Γ(p/2 + 1)` for integer `p ≥ 0`.
pub fn half_integer_gamma(p: u32) -> f64 {
    if p.is_multiple_of(2) {
        (1..=p / 2).map(f64::from).product()
    } else {
        // Γ(n + 1/2) = (n - 1/2)(n - 3/2)…(1/2) √π with n = (p + 1)/2
        let n = p.div_ceil(2);
        (0..n).map(|j| f64::from(j) + 0.5).product::<f64>() * PI.sqrt()
    }
}

/// `2^{p+2} Γ(p/2 + 1)`, an upper bound for
/// `∫_0^∞ r^{p+1} exp(-π r²/2 + π r/√2) dr`.
pub fn gamma_like_integral_bound(p: u32) -> f64 {
    2f64.powi(p as i32 + 2) * half_integer_gamma(p)
}

/// `2^{p+3} π^{p+1} Γ(p/2 + 1)`: `‖F^{(p)}‖_{L∞([-1/2,1/2]²)}` is at most this
/// times `‖F‖_{F∞}`.
pub fn smoothness_growth_constant(p: u32) -> f64 {
    2f64.powi(p as i32 + 3) * PI.powi(p as i32 + 1) * half_integer_gamma(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn weights_closed_form() {
        let w = tensor_weights(1.0, 3).unwrap();
        assert_abs_diff_eq!(w.omega[0], PI, epsilon = 1e-15);
        assert_abs_diff_eq!(w.omega[1], PI / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(w.omega[2], PI / 12.0, epsilon = 1e-15);
        let w2 = tensor_weights(2.0, 0).unwrap();
        assert_abs_diff_eq!(w2.omega[0], 4.0 * PI, epsilon = 1e-13);
        assert!(tensor_weights(0.0, 3).is_err());
        assert!(tensor_weights(-1.0, 3).is_err());
        // no overflow far out
        let far = tensor_weights(3.0, 100).unwrap();
        assert!(far.omega.iter().all(|w| w.is_finite() && *w > 0.0));
    }

    #[test]
    fn monomial_jets() {
        let one = jet_from_polynomial(&[c(0.6, 0.8)], c(0.0, 0.0), 3);
        assert_abs_diff_eq!(one.derivs[0][0].re, 1.0, epsilon = 1e-15);
        assert!(one.derivs.iter().flatten().skip(1).all(|v| v.norm() == 0.0));
        let z = jet_from_polynomial(&[c(0.0, 0.0), c(1.0, 0.0)], c(0.0, 0.0), 3);
        for k in 0..=3 {
            for l in 0..=3 {
                let expect = if k == 1 && l == 1 { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(z.derivs[k][l].norm(), expect, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn delta_of_constants_and_monomials() {
        let zero = jet_from_polynomial(&[c(0.0, 0.0)], c(0.0, 0.0), 8);
        let one = jet_from_polynomial(&[c(1.0, 0.0)], c(0.0, 0.0), 8);
        let z = jet_from_polynomial(&[c(0.0, 0.0), c(1.0, 0.0)], c(0.0, 0.0), 8);
        assert_abs_diff_eq!(
            delta_r(&one, &zero, 1.0).unwrap().squared,
            PI * PI,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            delta_r(&z, &zero, 1.0).unwrap().squared,
            PI * PI / 4.0,
            epsilon = 1e-12
        );
        assert_eq!(delta_r(&one, &one, 1.0).unwrap().squared, 0.0);
        let other = jet_from_polynomial(&[c(1.0, 0.0)], c(0.5, 0.0), 8);
        assert!(matches!(delta_r(&one, &other, 1.0), Err(Error::Usage(_))));
        let short = one.truncated(4);
        assert!(matches!(delta_r(&one, &short, 1.0), Err(Error::Usage(_))));
    }

    #[test]
    fn distance_bound_basics() {
        assert_eq!(distance_from_delta(2.0, 0.0).unwrap(), 0.0);
        assert!(distance_from_delta(0.0, 1.0).is_err());
        assert_abs_diff_eq!(
            distance_from_delta(1.0, 1.0).unwrap(),
            5f64.sqrt(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn structural_bound_ratio() {
        assert_eq!(delta_structural_bound(1.0, 1.0, 1.0, 0.0), 0.0);
        let a = delta_structural_bound(0.5, 1.0, 2.0, 0.3);
        let b = delta_structural_bound(1.0, 1.0, 2.0, 0.3);
        let expected = 16.0 * (8.0 * PI * PI * 0.75).exp();
        assert_relative_eq!(b / a, expected, max_relative = 1e-12);
    }

    #[test]
    fn phase_from_modulus_simple_cases() {
        let constant = jet_from_polynomial(&[c(-0.3, 0.4)], c(0.0, 0.0), 4);
        let out = local_phase_from_modulus(&constant, &[c(0.1, 0.2), c(-0.3, 0.0)]).unwrap();
        for v in out {
            assert_abs_diff_eq!(v.re, 0.5, epsilon = 1e-15);
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-15);
        }
        let linear = jet_from_polynomial(&[c(1.0, 0.0), c(1.0, 0.0)], c(0.0, 0.0), 1);
        let out = local_phase_from_modulus(&linear, &[c(0.3, 0.0)]).unwrap();
        assert_abs_diff_eq!(out[0].re, 1.3, epsilon = 1e-15);
        let zero = jet_from_polynomial(&[c(0.0, 0.0), c(1.0, 0.0)], c(0.0, 0.0), 3);
        assert!(matches!(
            local_phase_from_modulus(&zero, &[c(0.0, 0.0)]),
            Err(Error::SingularCenter { .. })
        ));
    }

    #[test]
    fn phase_from_modulus_atom() {
        let sig = GaussianMixtureSignal::new(vec![crate::signal::GaussianAtom::new(
            c(0.7, -0.2),
            0.3,
            -0.4,
        )
        .unwrap()])
        .unwrap();
        let f = sig.bargmann();
        let center = c(0.0, 0.0);
        let jet = jet_from_mixture(&sig, center, 12);
        let phase = f.eval(center).conj() / f.eval(center).norm();
        let pts: Vec<Complex64> = (0..9)
            .map(|j| Complex64::from_polar(0.45 * (j as f64 / 8.0), 0.7 * j as f64))
            .collect();
        let out = local_phase_from_modulus(&jet, &pts).unwrap();
        for (z, v) in pts.iter().zip(out) {
            assert!((v - f.eval(*z) * phase).norm() < 1e-6);
        }
    }

    #[test]
    fn jets_are_hermitian() {
        let sig = GaussianMixtureSignal::new(vec![
            crate::signal::GaussianAtom::real(1.0, 0.2),
            crate::signal::GaussianAtom::new(c(0.0, 0.5), -0.5, 0.3).unwrap(),
        ])
        .unwrap();
        let jet = jet_from_mixture(&sig, c(0.1, -0.2), 6);
        assert!(LocalJet::new(jet.center, jet.derivs.clone()).is_ok());
        assert!(jet.derivs[0][0].re >= 0.0);
    }

    #[test]
    fn fornberg_matches_textbook() {
        let w = fornberg_weights(&[-1.0, 0.0, 1.0], 2);
        assert_abs_diff_eq!(w[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(w[1], -2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(w[2], 1.0, epsilon = 1e-14);
        let w = fornberg_weights(&[-2.0, -1.0, 0.0, 1.0, 2.0], 1);
        assert_abs_diff_eq!(w[0], 1.0 / 12.0, epsilon = 1e-14);
        assert_abs_diff_eq!(w[1], -2.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(w[2], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn fd_jet_matches_analytic() {
        let f = ExpSum {
            terms: vec![
                crate::signal::ExpTerm {
                    coeff: c(0.8, 0.1),
                    rate: c(0.3, -0.2),
                },
                crate::signal::ExpTerm {
                    coeff: c(0.2, -0.3),
                    rate: c(-0.4, 0.1),
                },
            ],
        };
        let h = 0.02;
        let u = |a: i64, b: i64| f.eval(c(a as f64 * h, b as f64 * h)).norm_sqr();
        let fd = fd_jet(c(0.0, 0.0), 3, h, h, u).unwrap();
        let exact = jet_from_expsum(&f, c(0.0, 0.0), 3);
        for k in 0..=3 {
            for l in 0..=3 {
                let e = exact.derivs[k][l];
                assert!(
                    (fd.derivs[k][l] - e).norm() <= 1e-5 * e.norm().max(1e-2),
                    "({k},{l})"
                );
            }
        }
        assert!(fd_jet(c(0.0, 0.0), 5, h, h, u).is_err());
    }

    #[test]
    fn gamma_helpers() {
        assert_abs_diff_eq!(half_integer_gamma(0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(half_integer_gamma(1), 0.5 * PI.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(half_integer_gamma(4), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(half_integer_gamma(5), 1.875 * PI.sqrt(), epsilon = 1e-13);
        assert_abs_diff_eq!(gamma_like_integral_bound(0), 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(smoothness_growth_constant(0), 8.0 * PI, epsilon = 1e-13);
    }

    #[test]
    fn disk_norm_of_monomial() {
        let z2 = jet_from_polynomial(&[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], c(0.0, 0.0), 4);
        // ∫_{B_1} |z|⁴ = π/3
        assert_abs_diff_eq!(
            z2.disk_norm_squared(1.0).unwrap(),
            PI / 3.0,
            epsilon = 1e-14
        );
    }
}
