//! Gauss–Legendre product cubature on squares, a priori error bounds for
//! integrands with entire extensions, and a sampling planner.
//!
//! Squares are parametrised by their half-width `s`: the reference square is
//! `[-s, s]²`, so a unit square has `s = 1/2`.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Square;
use crate::signal::{entire_extension, EntireExtensionParams, GaussianMixtureSignal};

/// Newton tolerance for Legendre roots.
const NEWTON_TOL: f64 = 1e-15;
/// Bounds above this are reported as infinite.
const BOUND_CEILING: f64 = 1e300;

/// Neumaier-compensated sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// `N`-point Gauss–Legendre rule on `[-s, s]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussRule1D {
    pub n: usize,
    pub s: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// `(P_N(x), P_{N-1}(x))` by the three-term recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

/// `P_N(z)` for complex `z`.
pub fn legendre_complex(n: usize, z: Complex64) -> Complex64 {
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let (mut p0, mut p1) = (Complex64::new(1.0, 0.0), z);
    for k in 2..=n {
        let p2 = (z * p1 * (2 * k - 1) as f64 - p0 * (k - 1) as f64) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    p1
}

pub fn gauss_rule(n: usize, s: f64) -> Result<GaussRule1D> {
    if n < 1 {
        return Err(Error::domain("a Gauss rule needs at least one node"));
    }
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::domain(format!(
            "half-width must be positive, got {s}"
        )));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for k in 0..n.div_ceil(2) {
        let mut x = (PI * (k as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, q) = legendre_pair(n, x);
            dp = nf * (x * p - q) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= NEWTON_TOL {
                let (p, q) = legendre_pair(n, x);
                dp = nf * (x * p - q) / (x * x - 1.0);
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // roots come out in decreasing order; mirror them
        nodes[n - 1 - k] = x;
        nodes[k] = -x;
        weights[n - 1 - k] = w;
        weights[k] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok(GaussRule1D {
        n,
        s,
        nodes: nodes.iter().map(|x| x * s).collect(),
        weights: weights.iter().map(|w| w * s).collect(),
    })
}

impl GaussRule1D {
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| f(x) * w)
            .collect::<CompensatedSum>()
            .value()
    }
}

/// Placement of the reference square `[-s, s]²` in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub center: (f64, f64),
    pub rotation: f64,
}

impl Frame {
    pub fn identity() -> Self {
        Self {
            center: (0.0, 0.0),
            rotation: 0.0,
        }
    }

    pub fn apply(&self, u: f64, v: f64) -> (f64, f64) {
        let (sn, cs) = self.rotation.sin_cos();
        (
            self.center.0 + cs * u - sn * v,
            self.center.1 + sn * u + cs * v,
        )
    }
}

/// Tensor product of a Gauss rule with itself, mapped by a frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductRule2D {
    pub base: GaussRule1D,
    pub points: Vec<(f64, f64)>,
    pub weights: Vec<f64>,
    pub frame: Frame,
}

impl ProductRule2D {
    pub fn new(base: GaussRule1D, frame: Frame) -> Self {
        let mut points = Vec::with_capacity(base.n * base.n);
        let mut weights = Vec::with_capacity(base.n * base.n);
        for (&x, &wx) in base.nodes.iter().zip(&base.weights) {
            for (&y, &wy) in base.nodes.iter().zip(&base.weights) {
                points.push(frame.apply(x, y));
                weights.push(wx * wy);
            }
        }
        Self {
            base,
            points,
            weights,
            frame,
        }
    }

    /// Degree-`n` rule on `[-s, s]²`.
    pub fn reference(n: usize, s: f64) -> Result<Self> {
        Ok(Self::new(gauss_rule(n, s)?, Frame::identity()))
    }

    /// Degree-`n` rule on a given square.
    pub fn on_square(n: usize, square: &Square) -> Result<Self> {
        Ok(Self::new(
            gauss_rule(n, 0.5 * square.side)?,
            Frame {
                center: square.center,
                rotation: square.rotation,
            },
        ))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, phi: impl Fn(f64, f64) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&(x, y), &w)| phi(x, y) * w)
            .collect::<CompensatedSum>()
            .value()
    }

    /// Write `x,y,w` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(out);
        let err = |e: csv::Error| Error::parse("node csv", e.to_string());
        wr.write_record(["x", "y", "w"]).map_err(err)?;
        for (&(x, y), &w) in self.points.iter().zip(&self.weights) {
            wr.serialize((x, y, w)).map_err(err)?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Signed cubature error `exact - Σ φ(λ) w_λ`.
pub fn cubature_error(phi: impl Fn(f64, f64) -> f64, exact: f64, rule: &ProductRule2D) -> f64 {
    let mut acc = CompensatedSum::default();
    acc.add(exact);
    for (&(x, y), &w) in rule.points.iter().zip(&rule.weights) {
        acc.add(-phi(x, y) * w);
    }
    acc.value()
}

fn clamp_exp(log_value: f64) -> f64 {
    if log_value > BOUND_CEILING.ln() {
        f64::INFINITY
    } else {
        log_value.exp()
    }
}

/// Error bound for product Gauss cubature of an integrand holomorphic near
/// `R_{a,b} × R_{a,b}` with `‖Φ‖_{L∞(E_{s,a,b})} ≤ sup_phi`:
/// `(8s(a+b)/π) (m/s)^{-N} (2(a+b)/m + ½ log((a+s)/(a-s))) sup_phi`, `m = min{a-s, b}`.
pub fn chawla_bound(n: usize, s: f64, a: f64, b: f64, sup_phi: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::domain("half-width must be positive"));
    }
    if !(s < a) {
        return Err(Error::domain(format!("need s < a, got s = {s}, a = {a}")));
    }
    if !(b > 0.0) {
        return Err(Error::domain("b must be positive"));
    }
    if !(sup_phi >= 0.0) {
        return Err(Error::domain("sup norm must be nonnegative"));
    }
    if sup_phi == 0.0 {
        return Ok(0.0);
    }
    let m = (a - s).min(b);
    let log = (8.0 * s * (a + b) / PI).ln() - n as f64 * (m / s).ln()
        + (2.0 * (a + b) / m + 0.5 * ((a + s) / (a - s)).ln()).ln()
        + sup_phi.ln();
    Ok(clamp_exp(log))
}

/// `√2 e^{4πb²} κ`, the sup of the squared spectrogram-difference extension
/// on `E_{s,a,b}` in terms of `κ = ‖f‖² + ‖g‖²`.
pub fn phi_sup_bound(b: f64, kappa: f64) -> f64 {
    2f64.sqrt() * (4.0 * PI * b * b).exp() * kappa
}

/// `Φ(z, ζ) = (T f(z,ζ) conj(T f(z̄,ζ̄)) - T g(z,ζ) conj(T g(z̄,ζ̄)))²`, the entire
/// extension of `(Sf - Sg)²`.
pub fn spectro_difference_extension(
    f: &GaussianMixtureSignal,
    g: &GaussianMixtureSignal,
    z: Complex64,
    zeta: Complex64,
) -> Complex64 {
    let at = |sig: &GaussianMixtureSignal| {
        let p = entire_extension(sig, EntireExtensionParams { z, zeta });
        let q = entire_extension(
            sig,
            EntireExtensionParams {
                z: z.conj(),
                zeta: zeta.conj(),
            },
        );
        p * q.conj()
    };
    let d = at(f) - at(g);
    d * d
}

/// `3 (√(8π) s + 2)^{N+3} N^{-(N-1)/2} e^{N/2} κ`, evaluated in log space.
pub fn spectro_error_bound(n: usize, s: f64, kappa: f64) -> f64 {
    if kappa <= 0.0 || n == 0 {
        return if kappa <= 0.0 { 0.0 } else { f64::INFINITY };
    }
    clamp_exp(log_spectro_error_bound(n, s, kappa))
}

fn log_spectro_error_bound(n: usize, s: f64, kappa: f64) -> f64 {
    let nf = n as f64;
    3f64.ln() + (nf + 3.0) * ((8.0 * PI).sqrt() * s + 2.0).ln() - 0.5 * (nf - 1.0) * nf.ln()
        + 0.5 * nf
        + kappa.ln()
}

/// The same bound before simplification: [`chawla_bound`] with
/// `b = √(N/8π)`, `a = s + b` and [`phi_sup_bound`].
pub fn spectro_error_bound_unsimplified(n: usize, s: f64, kappa: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("N must be positive"));
    }
    let b = (n as f64 / (8.0 * PI)).sqrt();
    chawla_bound(n, s, s + b, b, phi_sup_bound(b, kappa))
}

/// Outcome of [`plan_sampling`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub n: usize,
    pub rule: ProductRule2D,
    pub epsilon: f64,
    pub predicted_error: f64,
    pub kappa: f64,
}

impl SamplingPlan {
    /// The plan's rule moved onto `square` (whose half-width must match).
    pub fn rule_on(&self, square: &Square) -> Result<ProductRule2D> {
        if (0.5 * square.side - self.rule.base.s).abs() > 1e-12 {
            return Err(Error::usage("square size does not match the plan"));
        }
        ProductRule2D::on_square(self.n, square)
    }
}

/// Smallest `N` with `spectro_error_bound(N, s, κ) ≤ ε⁴`.
pub fn plan_sampling(epsilon: f64, s: f64, kappa: f64) -> Result<SamplingPlan> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::domain(format!(
            "epsilon must lie in (0, 1/2), got {epsilon}"
        )));
    }
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::domain("half-width must be positive"));
    }
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::domain("kappa must be positive"));
    }
    let target = 4.0 * epsilon.ln();
    let ok = |n: usize| log_spectro_error_bound(n, s, kappa) <= target;
    // the log-bound is concave in N: scan the rising part, then search the falling part
    let mut n = 1;
    let found = loop {
        if ok(n) {
            break Some(n);
        }
        if log_spectro_error_bound(n + 1, s, kappa) < log_spectro_error_bound(n, s, kappa) {
            break None;
        }
        n += 1;
    };
    let n = match found {
        Some(n) => n,
        None => {
            let mut lo = n;
            let mut hi = n.max(1) * 2;
            while !ok(hi) {
                lo = hi;
                hi *= 2;
            }
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if ok(mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            hi
        }
    };
    Ok(SamplingPlan {
        n,
        rule: ProductRule2D::reference(n, s)?,
        epsilon,
        predicted_error: spectro_error_bound(n, s, kappa),
        kappa,
    })
}

/// `(Σ_λ v_λ² w_λ)^{1/2}`.
pub fn discrete_weighted_norm(values: &[f64], rule: &ProductRule2D) -> Result<f64> {
    if values.len() != rule.weights.len() {
        return Err(Error::usage(format!(
            "{} values for a rule with {} nodes",
            values.len(),
            rule.weights.len()
        )));
    }
    Ok(values
        .iter()
        .zip(&rule.weights)
        .map(|(v, w)| v * v * w)
        .collect::<CompensatedSum>()
        .value()
        .sqrt())
}

/// Check `|P_N(z)| ≥ min{a-1, b}^N` at 2000 points of `∂R_{a,b} ∪ [a, a+10]`.
pub fn legendre_lower_bound_check(n: usize, a: f64, b: f64) -> bool {
    if !(a > 1.0 && b > 0.0) {
        return false;
    }
    let bound = (a - 1.0).min(b).powi(n as i32);
    let perimeter = 4.0 * (a + b);
    let boundary_pts = 1500;
    let ray_pts = 2000 - boundary_pts;
    let on_boundary = (0..boundary_pts).map(|k| {
        let t = perimeter * k as f64 / boundary_pts as f64;
        let (w, h) = (2.0 * a, 2.0 * b);
        if t < w {
            Complex64::new(-a + t, -b)
        } else if t < w + h {
            Complex64::new(a, -b + (t - w))
        } else if t < 2.0 * w + h {
            Complex64::new(a - (t - w - h), b)
        } else {
            Complex64::new(-a, b - (t - 2.0 * w - h))
        }
    });
    let on_ray =
        (0..ray_pts).map(|k| Complex64::new(a + 10.0 * k as f64 / (ray_pts - 1) as f64, 0.0));
    on_boundary
        .chain(on_ray)
        .all(|z| legendre_complex(n, z).norm() >= bound * (1.0 - 1e-12))
}
