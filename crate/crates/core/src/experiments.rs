//! Experiment runners shared by the command line tool and the acceptance suite.

use serde::{Deserialize, Serialize};

use crate::cubature::{plan_sampling, spectro_error_bound, CompensatedSum, ProductRule2D};
use crate::engine::{
    quadrature_gabor_with, region_norm, spectrogram, Grid2D, Norm, QuadratureOptions,
};
use crate::error::{Error, Result};
use crate::geometry::{Region, Square, SquareCover};
use crate::graph::{certificate, StabilityCertificate};
use crate::par::Execution;
use crate::signal::{make_sharpness_pair, spectrogram_closed_form, GaussianMixtureSignal};
use crate::stitching::min_phase_distance;

/// Gauss points per axis for reference integrals over a square.
pub const REFERENCE_POINTS: usize = 400;

/// Least-squares line `y ≈ slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() {
        return Err(Error::usage("regression inputs differ in length"));
    }
    if xs.len() < 2 {
        return Err(Error::domain("regression needs at least two points"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::domain("regression abscissae are all equal"));
    }
    let slope = sxy / sxx;
    let r_squared = if syy > 0.0 {
        sxy * sxy / (sxx * syy)
    } else {
        1.0
    };
    Ok(LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SharpnessRow {
    pub a: f64,
    pub dist: f64,
    /// `‖Sf − Sg‖_{L²(Q)}^{1/2}`.
    pub sqrt_l2diff: f64,
    pub ratio: f64,
    pub log_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpnessCurve {
    pub rows: Vec<SharpnessRow>,
    /// Fit of `log_ratio` against `a`.
    pub fit: LinearFit,
}

/// One row of the sharpness experiment on the unit square at the origin,
/// with Gabor transforms computed by quadrature on a grid of spacing `step`.
pub fn sharpness_row(a: f64, step: f64, exec: Execution) -> Result<SharpnessRow> {
    if !(a > 0.0 && a <= 3.0) {
        return Err(Error::domain(format!("a must lie in (0, 3], got {a}")));
    }
    let (f, g) = make_sharpness_pair(a)?;
    let grid = Grid2D::spanning(-0.5, 0.5, -0.5, 0.5, step)?;
    let opts = QuadratureOptions {
        execution: exec,
        ..QuadratureOptions::default()
    };
    let gf = quadrature_gabor_with(&f, &grid, opts)?;
    let gg = quadrature_gabor_with(&g, &grid, opts)?;
    let region = Region::single(Square::unit(0.0, 0.0));
    let (_, dist) = min_phase_distance(&gf, &gg, &region)?;
    let diff = spectrogram(&gf)?.difference(&spectrogram(&gg)?)?;
    let sqrt_l2diff = region_norm(&diff, &region, Norm::L2)?.sqrt();
    let ratio = dist / sqrt_l2diff;
    Ok(SharpnessRow {
        a,
        dist,
        sqrt_l2diff,
        ratio,
        log_ratio: ratio.ln(),
    })
}

pub fn sharpness_curve(a_values: &[f64], step: f64, exec: Execution) -> Result<SharpnessCurve> {
    if a_values.is_empty() {
        return Err(Error::domain("empty range of a"));
    }
    let rows = a_values
        .iter()
        .map(|&a| sharpness_row(a, step, exec))
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = rows.iter().map(|r| r.a).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.log_ratio).collect();
    let fit = if rows.len() >= 2 {
        linear_fit(&xs, &ys)?
    } else {
        LinearFit {
            slope: f64::NAN,
            intercept: ys[0],
            r_squared: f64::NAN,
        }
    };
    Ok(SharpnessCurve { rows, fit })
}

/// `(Sf − Sg)²` at `(x, y)` from closed forms.
pub fn squared_spectro_difference(
    f: &GaussianMixtureSignal,
    g: &GaussianMixtureSignal,
    x: f64,
    y: f64,
) -> f64 {
    let d = spectrogram_closed_form(f, x, y) - spectrogram_closed_form(g, x, y);
    d * d
}

/// `∫_Q (Sf − Sg)²` by a [`REFERENCE_POINTS`]² Gauss product rule.
pub fn reference_integral(
    f: &GaussianMixtureSignal,
    g: &GaussianMixtureSignal,
    square: &Square,
) -> Result<f64> {
    let rule = ProductRule2D::on_square(REFERENCE_POINTS, square)?;
    Ok(rule.integrate(|x, y| squared_spectro_difference(f, g, x, y)))
}

fn rule_integral(
    f: &GaussianMixtureSignal,
    g: &GaussianMixtureSignal,
    rule: &ProductRule2D,
) -> f64 {
    rule.points
        .iter()
        .zip(&rule.weights)
        .map(|(&(x, y), w)| w * squared_spectro_difference(f, g, x, y))
        .collect::<CompensatedSum>()
        .value()
}

/// `‖f‖² + ‖g‖²`.
pub fn kappa(f: &GaussianMixtureSignal, g: &GaussianMixtureSignal) -> f64 {
    f.l2_norm_squared() + g.l2_norm_squared()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubatureRow {
    pub n: usize,
    pub measured: f64,
    pub bound: f64,
}

/// Measured Gauss product error for `(Sf − Sg)²` on `square` next to the a-priori bound.
pub fn cubature_decay(
    f: &GaussianMixtureSignal,
    g: &GaussianMixtureSignal,
    square: &Square,
    ns: &[usize],
) -> Result<Vec<CubatureRow>> {
    if ns.is_empty() {
        return Err(Error::domain("empty list of rule sizes"));
    }
    let exact = reference_integral(f, g, square)?;
    let k = kappa(f, g);
    let s = 0.5 * square.side;
    ns.iter()
        .map(|&n| {
            let rule = ProductRule2D::on_square(n, square)?;
            Ok(CubatureRow {
                n,
                measured: (rule_integral(f, g, &rule) - exact).abs(),
                bound: spectro_error_bound(n, s, k),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlannerRow {
    pub epsilon: f64,
    pub n: usize,
    pub nodes: usize,
    pub predicted: f64,
    /// Measured `|E|` against the reference integral.
    pub achieved: f64,
    /// `‖Sf − Sg‖_{ℓ²_w(Λ)}`.
    pub discrete_norm: f64,
    /// `‖Sf − Sg‖_{L²(Q)}` from the reference integral.
    pub reference_norm: f64,
}

/// Plans and runs a sampling rule for each ε.
pub fn planner_sweep(
    f: &GaussianMixtureSignal,
    g: &GaussianMixtureSignal,
    square: &Square,
    epsilons: &[f64],
) -> Result<Vec<PlannerRow>> {
    if epsilons.is_empty() {
        return Err(Error::domain("empty list of tolerances"));
    }
    let exact = reference_integral(f, g, square)?;
    let k = kappa(f, g);
    epsilons
        .iter()
        .map(|&eps| {
            let plan = plan_sampling(eps, 0.5 * square.side, k)?;
            let rule = plan.rule_on(square)?;
            let approx = rule_integral(f, g, &rule);
            Ok(PlannerRow {
                epsilon: eps,
                n: plan.n,
                nodes: rule.len(),
                predicted: plan.predicted_error,
                achieved: (approx - exact).abs(),
                discrete_norm: approx.max(0.0).sqrt(),
                reference_norm: exact.sqrt(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateRow {
    pub certificate: StabilityCertificate,
    /// `min_τ ‖Gg − τGf‖_{L²(Ω)}`.
    pub dist: f64,
    /// `‖Sf − Sg‖_{L²(Ω)}`.
    pub l2diff: f64,
    /// `dist / (bound_cheeger · l2diff^{1/2})`.
    pub ratio: f64,
}

/// Certificate for `(f, g)` on `cover` together with the distance it controls,
/// all computed by quadrature on a grid of spacing `step`.
pub fn certificate_ratio(
    f: &GaussianMixtureSignal,
    g: &GaussianMixtureSignal,
    cover: &SquareCover,
    step: f64,
    exec: Execution,
) -> Result<CertificateRow> {
    let region = cover.region();
    let grid = Grid2D::enclosing(&region.bbox(), step)?;
    let opts = QuadratureOptions {
        execution: exec,
        ..QuadratureOptions::default()
    };
    let gf = quadrature_gabor_with(f, &grid, opts)?;
    let gg = quadrature_gabor_with(g, &grid, opts)?;
    let (sf, sg) = (spectrogram(&gf)?, spectrogram(&gg)?);
    let cert = certificate(&sf, &sg, cover)?;
    let (_, dist) = min_phase_distance(&gf, &gg, &region)?;
    let l2diff = region_norm(&sf.difference(&sg)?, &region, Norm::L2)?;
    let ratio = dist / (cert.bound_cheeger * l2diff.sqrt());
    Ok(CertificateRow {
        certificate: cert,
        dist,
        l2diff,
        ratio,
    })
}
