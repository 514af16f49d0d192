//! Gaussian mixture signals with closed-form time-frequency representations.
//!
//! An atom is `A · exp(-π (t - τ)²) · exp(2πi ν t)`. Its Gabor transform
//!
//! ```text
//! G f(x, y) = ∫ f(t) exp(-π (t - x)²) exp(-2πi t y) dt
//! ```
//!
//! is again Gaussian:
//! `A 2^{-1/2} exp(-π(x-τ)²/2 - π(y-ν)²/2 - πi (x+τ)(y-ν))`.
//! The same expression with complex `(z, ζ)` in place of `(x, y)` gives the
//! entire extension `T f(z, ζ)`.
//!
//! On the Fock side, with `z = x + iy`, the Bargmann transform of an atom is
//! an exponential `c · exp(π w z)` where `w = τ + iν`, and
//! `G f(x, -y) = B f(z) · exp(πi x y - π|z|²/2)`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// One shifted and modulated Gaussian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianAtom {
    pub amplitude: Complex64,
    /// Time shift τ.
    pub shift: f64,
    /// Frequency shift ν.
    pub modulation: f64,
}

impl GaussianAtom {
    pub fn new(amplitude: Complex64, shift: f64, modulation: f64) -> Result<Self> {
        let atom = Self {
            amplitude,
            shift,
            modulation,
        };
        atom.validate()?;
        Ok(atom)
    }

    /// Real-amplitude, unmodulated atom.
    pub fn real(amplitude: f64, shift: f64) -> Self {
        Self {
            amplitude: Complex64::new(amplitude, 0.0),
            shift,
            modulation: 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.amplitude.re.is_finite()
            && self.amplitude.im.is_finite()
            && self.shift.is_finite()
            && self.modulation.is_finite())
        {
            return Err(Error::domain("gaussian atom has non-finite parameters"));
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        let d = t - self.shift;
        self.amplitude
            * (-PI * d * d).exp()
            * Complex64::from_polar(1.0, 2.0 * PI * self.modulation * t)
    }

    fn gabor(&self, x: f64, y: f64) -> Complex64 {
        let dx = x - self.shift;
        let dy = y - self.modulation;
        let envelope = FRAC_1_SQRT_2 * (-0.5 * PI * (dx * dx + dy * dy)).exp();
        self.amplitude * envelope * Complex64::from_polar(1.0, -PI * (x + self.shift) * dy)
    }

    fn entire(&self, z: Complex64, zeta: Complex64) -> Complex64 {
        let dz = z - self.shift;
        let dzeta = zeta - self.modulation;
        let exponent = -0.5 * PI * (dz * dz + dzeta * dzeta) - I * PI * (z + self.shift) * dzeta;
        self.amplitude * FRAC_1_SQRT_2 * exponent.exp()
    }

    /// `⟨self, other⟩_{L²(ℝ)}`, evaluated analytically.
    pub fn inner(&self, other: &GaussianAtom) -> Complex64 {
        let dt = self.shift - other.shift;
        let eta = other.modulation - self.modulation;
        let magnitude = FRAC_1_SQRT_2 * (-0.5 * PI * (dt * dt + eta * eta)).exp();
        let phase = Complex64::from_polar(1.0, -PI * (self.shift + other.shift) * eta);
        self.amplitude * other.amplitude.conj() * magnitude * phase
    }
}

/// Finite, nonempty sum of Gaussian atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixtureSignal {
    atoms: Vec<GaussianAtom>,
}

impl GaussianMixtureSignal {
    pub fn new(atoms: Vec<GaussianAtom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::domain("a mixture needs at least one atom"));
        }
        for atom in &atoms {
            atom.validate()?;
        }
        Ok(Self { atoms })
    }

    /// The normalised Gaussian `e^{-πt²}` (amplitude 1, no shift).
    pub fn gaussian() -> Self {
        Self {
            atoms: vec![GaussianAtom::real(1.0, 0.0)],
        }
    }

    pub fn atoms(&self) -> &[GaussianAtom] {
        &self.atoms
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.atoms.iter().map(|a| a.eval(t)).sum()
    }

    /// Multiply every amplitude by `c`.
    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            atoms: self
                .atoms
                .iter()
                .map(|a| GaussianAtom {
                    amplitude: a.amplitude * c,
                    ..*a
                })
                .collect(),
        }
    }

    /// Time-frequency shift `f(t - dx) e^{2πi dy t}`; its Gabor transform is
    /// `e^{-2πi dx (y - dy)} G f(x - dx, y - dy)`.
    pub fn shifted(&self, dx: f64, dy: f64) -> Self {
        Self {
            atoms: self
                .atoms
                .iter()
                .map(|a| GaussianAtom {
                    amplitude: a.amplitude
                        * Complex64::from_polar(1.0, -2.0 * PI * a.modulation * dx),
                    shift: a.shift + dx,
                    modulation: a.modulation + dy,
                })
                .collect(),
        }
    }

    /// Concatenate the atoms of two mixtures.
    pub fn plus(&self, other: &GaussianMixtureSignal) -> Self {
        let mut atoms = self.atoms.clone();
        atoms.extend_from_slice(&other.atoms);
        Self { atoms }
    }

    /// `‖f‖²_{L²(ℝ)}` from the exact Gram matrix.
    pub fn l2_norm_squared(&self) -> f64 {
        let mut acc = 0.0;
        for (i, a) in self.atoms.iter().enumerate() {
            acc += a.inner(a).re;
            for b in &self.atoms[i + 1..] {
                acc += 2.0 * a.inner(b).re;
            }
        }
        acc.max(0.0)
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_squared().sqrt()
    }

    /// Fock-side representative `B f` as an exponential sum.
    pub fn bargmann(&self) -> ExpSum {
        let terms = self
            .atoms
            .iter()
            .map(|a| {
                let (tau, nu) = (a.shift, a.modulation);
                let coeff = a.amplitude
                    * FRAC_1_SQRT_2
                    * (Complex64::new(-0.5 * PI * (tau * tau + nu * nu), PI * tau * nu)).exp();
                ExpTerm {
                    coeff,
                    rate: Complex64::new(tau, nu),
                }
            })
            .collect();
        ExpSum { terms }
    }
}

/// Closed-form Gabor transform of a mixture at `(x, y)`.
pub fn gabor_closed_form(sig: &GaussianMixtureSignal, x: f64, y: f64) -> Complex64 {
    sig.atoms.iter().map(|a| a.gabor(x, y)).sum()
}

/// Closed-form spectrogram `|G f(x, y)|²`.
pub fn spectrogram_closed_form(sig: &GaussianMixtureSignal, x: f64, y: f64) -> f64 {
    gabor_closed_form(sig, x, y).norm_sqr()
}

/// Complex arguments `(z, ζ)` of the entire extension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntireExtensionParams {
    pub z: Complex64,
    pub zeta: Complex64,
}

/// `T f(z, ζ) = ∫ f(t) exp(-π(t - z)² - 2πi ζ t) dt`, in closed form.
pub fn entire_extension(sig: &GaussianMixtureSignal, p: EntireExtensionParams) -> Complex64 {
    sig.atoms.iter().map(|a| a.entire(p.z, p.zeta)).sum()
}

/// Growth bound for the entire extension at `(x + iy, ξ + iη)`:
/// `2^{-1/4} ‖f‖ exp(π(y² + 2xη + η²))`.
pub fn entire_extension_bound(norm: f64, p: EntireExtensionParams) -> f64 {
    let (x, y) = (p.z.re, p.z.im);
    let eta = p.zeta.im;
    2f64.powf(-0.25) * norm * (PI * (y * y + 2.0 * x * eta + eta * eta)).exp()
}

/// `(f_a, g_a) = (φ(·+a) + φ(·-a), φ(·+a) - φ(·-a))` with `φ = 2^{-1/2} e^{-π·²}`.
pub fn make_sharpness_pair(a: f64) -> Result<(GaussianMixtureSignal, GaussianMixtureSignal)> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::domain(format!(
            "sharpness parameter must be positive, got {a}"
        )));
    }
    let amp = FRAC_1_SQRT_2;
    let f = GaussianMixtureSignal::new(vec![
        GaussianAtom::real(amp, -a),
        GaussianAtom::real(amp, a),
    ])?;
    let g = GaussianMixtureSignal::new(vec![
        GaussianAtom::real(amp, -a),
        GaussianAtom::real(-amp, a),
    ])?;
    Ok((f, g))
}

/// Closed-form factorisation of the sharpness pair:
/// `G f_a(x, y) = e^{-πa²/2} e^{-π|z|²/2 - πixy} cos(aπi z̄)` and
/// `G g_a(x, y) = i e^{-πa²/2} e^{-π|z|²/2 - πixy} sin(aπi z̄)`.
pub fn sharpness_factorization(a: f64, x: f64, y: f64) -> (Complex64, Complex64) {
    let zbar = Complex64::new(x, -y);
    let prefactor = Complex64::new(-0.5 * PI * (a * a + x * x + y * y), -PI * x * y).exp();
    let arg = I * a * PI * zbar;
    (prefactor * arg.cos(), I * prefactor * arg.sin())
}

/// One term `coeff · exp(π · rate · z)` of an [`ExpSum`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpTerm {
    pub coeff: Complex64,
    pub rate: Complex64,
}

/// Entire function `Σ_j c_j exp(π w_j z)`; the Bargmann image of a mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpSum {
    pub terms: Vec<ExpTerm>,
}

impl ExpSum {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|t| t.coeff * (PI * t.rate * z).exp())
            .sum()
    }

    /// `[F(c), F'(c), …, F^{(order)}(c)]`.
    pub fn derivatives(&self, center: Complex64, order: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); order + 1];
        for t in &self.terms {
            let mut value = t.coeff * (PI * t.rate * center).exp();
            let step = PI * t.rate;
            for d in out.iter_mut() {
                *d += value;
                value *= step;
            }
        }
        out
    }

    /// Fock translation `H(u) = F(u + c) exp(-π c̄ u - π|c|²/2)`.
    ///
    /// `|H(u)|² e^{-π|u|²} = |F(u + c)|² e^{-π|u + c|²}`, so `H` carries the
    /// spectrogram near `c` re-centred at the origin.
    pub fn translated(&self, c: Complex64) -> ExpSum {
        let terms = self
            .terms
            .iter()
            .map(|t| ExpTerm {
                coeff: t.coeff * (PI * t.rate * c - 0.5 * PI * c.norm_sqr()).exp(),
                rate: t.rate - c.conj(),
            })
            .collect();
        ExpSum { terms }
    }

    /// Weighted sup-norm estimate `max |F(z)| e^{-π|z|²/2}` over the given points.
    pub fn weighted_max(&self, points: &[Complex64]) -> f64 {
        points
            .iter()
            .map(|&z| self.eval(z).norm() * (-0.5 * PI * z.norm_sqr()).exp())
            .fold(0.0, f64::max)
    }
}

/// Fock coordinate `z = x - iy` of the time-frequency point `(x, y)`.
///
/// With this map `G f(x, y) = B f(z) · exp(-πi x y - π|z|²/2)`.
pub fn fock_point(x: f64, y: f64) -> Complex64 {
    Complex64::new(x, -y)
}

/// Gabor value at `(x, y)` from the Fock-side value `F(z)`, `z = x - iy`.
pub fn gabor_from_fock(value: Complex64, x: f64, y: f64) -> Complex64 {
    value * Complex64::new(-0.5 * PI * (x * x + y * y), -PI * x * y).exp()
}
