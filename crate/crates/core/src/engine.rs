//! Numerical Gabor transforms on rectangular grids and norms over unions of squares.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Rect, Region, Shape, Square};
use crate::par::{map_range, Execution};
use crate::signal::GaussianMixtureSignal;

/// Half-width beyond which the window `e^{-πu²}` drops below 1e-16.
pub fn window_cutoff() -> f64 {
    (16.0 * std::f64::consts::LN_10 / PI).sqrt()
}

/// Tolerance used to decide whether a region lies inside a grid.
const DOMAIN_TOL: f64 = 1e-9;

/// Uniformly sampled signal on `[t0, t0 + dt·(len-1)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    samples: Vec<Complex64>,
    t0: f64,
    dt: f64,
}

impl SampledSignal {
    pub fn new(samples: Vec<Complex64>, t0: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::domain(format!(
                "sample spacing must be positive, got {dt}"
            )));
        }
        if !t0.is_finite()
            || samples
                .iter()
                .any(|s| !(s.re.is_finite() && s.im.is_finite()))
        {
            return Err(Error::domain("sampled signal contains non-finite values"));
        }
        Ok(Self { samples, t0, dt })
    }

    /// Sample `f` at `t0 + k·dt` for `k < n`.
    pub fn from_fn(t0: f64, dt: f64, n: usize, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        Self::new((0..n).map(|k| f(t0 + k as f64 * dt)).collect(), t0, dt)
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    /// Trapezoidal `‖f‖²_{L²}` over the support.
    pub fn l2_norm_squared(&self) -> f64 {
        let n = self.samples.len();
        self.samples
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let w = if k == 0 || k + 1 == n { 0.5 } else { 1.0 };
                w * s.norm_sqr()
            })
            .sum::<f64>()
            * self.dt
    }
}

/// Anything the quadrature engine can integrate against the Gaussian window.
pub trait QuadratureSource: Sync {
    /// Weighted samples `(t_k, w_k f(t_k))` with `|t_k - x| ≤ half_width`.
    fn window_nodes(&self, x: f64, half_width: f64, mixture_step: f64) -> Vec<(f64, Complex64)>;

    fn is_empty(&self) -> bool;
}

impl QuadratureSource for SampledSignal {
    fn window_nodes(&self, x: f64, half_width: f64, _mixture_step: f64) -> Vec<(f64, Complex64)> {
        let n = self.samples.len();
        if n == 0 {
            return Vec::new();
        }
        let lo = ((x - half_width - self.t0) / self.dt).ceil().max(0.0);
        let hi = ((x + half_width - self.t0) / self.dt).floor();
        if hi < lo {
            return Vec::new();
        }
        let (lo, hi) = (lo as usize, (hi as usize).min(n - 1));
        (lo..=hi)
            .map(|k| {
                let w = if n == 1 {
                    1.0
                } else if k == 0 || k + 1 == n {
                    0.5
                } else {
                    1.0
                };
                (self.time(k), self.samples[k] * (w * self.dt))
            })
            .collect()
    }

    fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

impl QuadratureSource for GaussianMixtureSignal {
    fn window_nodes(&self, x: f64, half_width: f64, step: f64) -> Vec<(f64, Complex64)> {
        let lo = ((x - half_width) / step).ceil() as i64;
        let hi = ((x + half_width) / step).floor() as i64;
        (lo..=hi)
            .map(|k| {
                let t = k as f64 * step;
                (t, self.eval(t) * step)
            })
            .collect()
    }

    fn is_empty(&self) -> bool {
        self.atoms().is_empty()
    }
}

/// Either kind of signal accepted by the engine.
#[derive(Debug, Clone, PartialEq)]
pub enum Signal {
    Mixture(GaussianMixtureSignal),
    Sampled(SampledSignal),
}

impl From<GaussianMixtureSignal> for Signal {
    fn from(s: GaussianMixtureSignal) -> Self {
        Signal::Mixture(s)
    }
}

impl From<SampledSignal> for Signal {
    fn from(s: SampledSignal) -> Self {
        Signal::Sampled(s)
    }
}

impl QuadratureSource for Signal {
    fn window_nodes(&self, x: f64, half_width: f64, step: f64) -> Vec<(f64, Complex64)> {
        match self {
            Signal::Mixture(m) => m.window_nodes(x, half_width, step),
            Signal::Sampled(s) => s.window_nodes(x, half_width, step),
        }
    }

    fn is_empty(&self) -> bool {
        match self {
            Signal::Mixture(m) => QuadratureSource::is_empty(m),
            Signal::Sampled(s) => s.is_empty(),
        }
    }
}

/// Regular grid `x_i = x0 + i·dx`, `y_j = y0 + j·dy`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub x0: f64,
    pub y0: f64,
    pub dx: f64,
    pub dy: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Grid2D {
    pub fn new(x0: f64, y0: f64, dx: f64, dy: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(dx > 0.0 && dy > 0.0 && dx.is_finite() && dy.is_finite()) {
            return Err(Error::domain("grid spacings must be positive"));
        }
        if nx == 0 || ny == 0 {
            return Err(Error::domain("grid needs at least one point per axis"));
        }
        if !(x0.is_finite() && y0.is_finite()) {
            return Err(Error::domain("grid origin must be finite"));
        }
        Ok(Self {
            x0,
            y0,
            dx,
            dy,
            nx,
            ny,
        })
    }

    /// Grid with spacing `step` spanning `[x0, x1] × [y0, y1]` (end points rounded
    /// to whole steps).
    pub fn spanning(x0: f64, x1: f64, y0: f64, y1: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !(x1 >= x0 && y1 >= y0) {
            return Err(Error::domain("invalid grid extent"));
        }
        let nx = ((x1 - x0) / step).round() as usize + 1;
        let ny = ((y1 - y0) / step).round() as usize + 1;
        Self::new(x0, y0, step, step, nx, ny)
    }

    /// Smallest grid with spacing `step` aligned to multiples of `step` that
    /// contains `rect`.
    pub fn enclosing(rect: &Rect, step: f64) -> Result<Self> {
        let x0 = (rect.x0 / step - 1e-9).floor() * step;
        let y0 = (rect.y0 / step - 1e-9).floor() * step;
        let x1 = (rect.x1 / step + 1e-9).ceil() * step;
        let y1 = (rect.y1 / step + 1e-9).ceil() * step;
        Self::spanning(x0, x1, y0, y1, step)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y0 + j as f64 * self.dy
    }

    /// Flat index of `(i, j)`; `x` is the slow axis.
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    pub fn point(&self, idx: usize) -> (f64, f64) {
        (self.x(idx / self.ny), self.y(idx % self.ny))
    }

    pub fn bbox(&self) -> Rect {
        Rect {
            x0: self.x0,
            x1: self.x(self.nx - 1),
            y0: self.y0,
            y1: self.y(self.ny - 1),
        }
    }

    pub fn cell(&self, i: usize, j: usize) -> Rect {
        let (x, y) = (self.x(i), self.y(j));
        Rect {
            x0: x - 0.5 * self.dx,
            x1: x + 0.5 * self.dx,
            y0: y - 0.5 * self.dy,
            y1: y + 0.5 * self.dy,
        }
    }

    pub fn contains_rect(&self, r: &Rect) -> bool {
        let b = self.bbox();
        r.x0 >= b.x0 - DOMAIN_TOL
            && r.x1 <= b.x1 + DOMAIN_TOL
            && r.y0 >= b.y0 - DOMAIN_TOL
            && r.y1 <= b.y1 + DOMAIN_TOL
    }

    fn same_as(&self, other: &Grid2D) -> bool {
        self.nx == other.nx
            && self.ny == other.ny
            && (self.x0 - other.x0).abs() <= DOMAIN_TOL
            && (self.y0 - other.y0).abs() <= DOMAIN_TOL
            && (self.dx - other.dx).abs() <= DOMAIN_TOL
            && (self.dy - other.dy).abs() <= DOMAIN_TOL
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Gabor,
    Spectrogram,
}

/// Values stored on a grid, complex for Gabor fields and real for spectrograms.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldValues {
    Gabor(Vec<Complex64>),
    Spectrogram(Vec<f64>),
}

/// A sampled Gabor transform or spectrogram.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrogramField {
    grid: Grid2D,
    values: FieldValues,
}

impl SpectrogramField {
    pub fn gabor(grid: Grid2D, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::usage(format!(
                "field has {} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid,
            values: FieldValues::Gabor(values),
        })
    }

    pub fn spectrogram(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::usage(format!(
                "field has {} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::domain(format!(
                "spectrogram value {v} is not a finite nonnegative number"
            )));
        }
        Ok(Self {
            grid,
            values: FieldValues::Spectrogram(values),
        })
    }

    /// Sample a function of `(x, y)` on the grid.
    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> Complex64 + Sync + Send) -> Self {
        let values = map_range(grid.len(), Execution::default(), |idx| {
            let (x, y) = grid.point(idx);
            f(x, y)
        });
        Self {
            grid,
            values: FieldValues::Gabor(values),
        }
    }

    /// Sample a nonnegative function of `(x, y)` on the grid.
    pub fn spectrogram_from_fn(
        grid: Grid2D,
        f: impl Fn(f64, f64) -> f64 + Sync + Send,
    ) -> Result<Self> {
        let values = map_range(grid.len(), Execution::default(), |idx| {
            let (x, y) = grid.point(idx);
            f(x, y)
        });
        Self::spectrogram(grid, values)
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn kind(&self) -> FieldKind {
        match self.values {
            FieldValues::Gabor(_) => FieldKind::Gabor,
            FieldValues::Spectrogram(_) => FieldKind::Spectrogram,
        }
    }

    pub fn values(&self) -> &FieldValues {
        &self.values
    }

    pub fn gabor_values(&self) -> Result<&[Complex64]> {
        match &self.values {
            FieldValues::Gabor(v) => Ok(v),
            FieldValues::Spectrogram(_) => {
                Err(Error::usage("expected a Gabor field, got a spectrogram"))
            }
        }
    }

    pub fn spectrogram_values(&self) -> Result<&[f64]> {
        match &self.values {
            FieldValues::Spectrogram(v) => Ok(v),
            FieldValues::Gabor(_) => Err(Error::usage("expected a spectrogram, got a Gabor field")),
        }
    }

    /// Magnitude of the stored value: `|G f|` or `S f`.
    pub fn magnitude(&self, idx: usize) -> f64 {
        match &self.values {
            FieldValues::Gabor(v) => v[idx].norm(),
            FieldValues::Spectrogram(v) => v[idx],
        }
    }

    /// Largest stored magnitude and its flat index.
    pub fn argmax(&self) -> (usize, f64) {
        (0..self.grid.len()).map(|i| (i, self.magnitude(i))).fold(
            (0, f64::NEG_INFINITY),
            |best, cur| if cur.1 > best.1 { cur } else { best },
        )
    }

    pub fn max_magnitude(&self) -> f64 {
        self.argmax().1
    }

    fn check_same_grid(&self, other: &SpectrogramField) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::usage("fields live on different grids"))
        }
    }

    /// Pointwise difference `self - other` of two fields of the same kind.
    pub fn difference(&self, other: &SpectrogramField) -> Result<SpectrogramField> {
        self.check_same_grid(other)?;
        match (&self.values, &other.values) {
            (FieldValues::Gabor(a), FieldValues::Gabor(b)) => Ok(Self {
                grid: self.grid,
                values: FieldValues::Gabor(a.iter().zip(b).map(|(x, y)| x - y).collect()),
            }),
            (FieldValues::Spectrogram(a), FieldValues::Spectrogram(b)) => Ok(Self {
                grid: self.grid,
                // signed differences are stored as Gabor values with zero imaginary part
                values: FieldValues::Gabor(
                    a.iter()
                        .zip(b)
                        .map(|(x, y)| Complex64::new(x - y, 0.0))
                        .collect(),
                ),
            }),
            _ => Err(Error::usage("cannot subtract fields of different kinds")),
        }
    }
}

/// Options for [`quadrature_gabor_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    /// Node spacing used for mixtures (sampled signals use their own spacing).
    pub mixture_step: f64,
    pub execution: Execution,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            mixture_step: 0.05,
            execution: Execution::default(),
        }
    }
}

/// Gabor transform of `sig` on `grid` by the trapezoidal rule.
pub fn quadrature_gabor<S: QuadratureSource + ?Sized>(
    sig: &S,
    grid: &Grid2D,
) -> Result<SpectrogramField> {
    quadrature_gabor_with(sig, grid, QuadratureOptions::default())
}

pub fn quadrature_gabor_with<S: QuadratureSource + ?Sized>(
    sig: &S,
    grid: &Grid2D,
    opts: QuadratureOptions,
) -> Result<SpectrogramField> {
    if sig.is_empty() {
        return Err(Error::domain("cannot transform an empty signal"));
    }
    if !(opts.mixture_step > 0.0) {
        return Err(Error::domain("quadrature step must be positive"));
    }
    let cutoff = window_cutoff();
    let columns = map_range(grid.nx, opts.execution, |i| {
        let x = grid.x(i);
        let nodes: Vec<(f64, Complex64)> = sig
            .window_nodes(x, cutoff, opts.mixture_step)
            .into_iter()
            .map(|(t, v)| (t, v * (-PI * (t - x) * (t - x)).exp()))
            .collect();
        (0..grid.ny)
            .map(|j| {
                let y = grid.y(j);
                nodes
                    .iter()
                    .map(|&(t, v)| v * Complex64::from_polar(1.0, -2.0 * PI * t * y))
                    .sum::<Complex64>()
            })
            .collect::<Vec<_>>()
    });
    SpectrogramField::gabor(*grid, columns.into_iter().flatten().collect())
}

/// Pointwise `|G f|²` of a Gabor field.
pub fn spectrogram(field: &SpectrogramField) -> Result<SpectrogramField> {
    let values = field.gabor_values()?;
    Ok(SpectrogramField {
        grid: field.grid,
        values: FieldValues::Spectrogram(values.iter().map(|v| v.norm_sqr()).collect()),
    })
}

/// Integration weights of a shape on a grid: each grid value stands for its
/// cell `[x ± dx/2] × [y ± dy/2]`, weighted by the covered cell area.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageMask {
    entries: Vec<(usize, f64)>,
    /// Grid points lying in the closed shape.
    inside: Vec<usize>,
}

impl CoverageMask {
    pub fn new(grid: &Grid2D, shape: Shape<'_>) -> Result<Self> {
        let Some(bbox) = shape.bbox() else {
            return Ok(Self {
                entries: Vec::new(),
                inside: Vec::new(),
            });
        };
        if !grid.contains_rect(&bbox) {
            return Err(Error::domain(format!(
                "region [{:.4}, {:.4}] x [{:.4}, {:.4}] exceeds the field grid",
                bbox.x0, bbox.x1, bbox.y0, bbox.y1
            )));
        }
        let range = |lo: f64, hi: f64, o: f64, d: f64, n: usize| {
            let a = ((lo - o) / d - 0.5).floor().max(0.0) as usize;
            let b = (((hi - o) / d + 0.5).ceil().max(0.0) as usize).min(n - 1);
            a..=b
        };
        let cell_area = grid.dx * grid.dy;
        let mut entries = Vec::new();
        let mut inside = Vec::new();
        for i in range(bbox.x0, bbox.x1, grid.x0, grid.dx, grid.nx) {
            for j in range(bbox.y0, bbox.y1, grid.y0, grid.dy, grid.ny) {
                let frac = shape.cell_fraction(&grid.cell(i, j));
                let idx = grid.index(i, j);
                if frac > 0.0 {
                    entries.push((idx, frac * cell_area));
                }
                if shape_contains_point(&shape, grid.x(i), grid.y(j)) {
                    inside.push(idx);
                }
            }
        }
        Ok(Self { entries, inside })
    }

    pub fn region(grid: &Grid2D, region: &Region) -> Result<Self> {
        Self::new(grid, Shape::Union(region.squares()))
    }

    pub fn square(grid: &Grid2D, square: &Square) -> Result<Self> {
        Self::new(grid, Shape::Union(std::slice::from_ref(square)))
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn inside(&self) -> &[usize] {
        &self.inside
    }

    /// Total covered area.
    pub fn area(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn shape_contains_point(shape: &Shape<'_>, x: f64, y: f64) -> bool {
    let within = |s: &Square| {
        let (u, v) = s.to_local(x, y);
        let h = 0.5 * s.side + DOMAIN_TOL;
        u.abs() <= h && v.abs() <= h
    };
    match shape {
        Shape::Union(sq) => sq.iter().any(within),
        Shape::Intersection(a, b) => within(a) && within(b),
    }
}

/// Which `L^p` norm to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Norm {
    L1,
    L2,
    LInf,
}

/// `L^p` norm of the field magnitude over a precomputed mask.
pub fn masked_norm(field: &SpectrogramField, mask: &CoverageMask, p: Norm) -> f64 {
    match p {
        Norm::L1 => mask
            .entries
            .iter()
            .map(|&(idx, w)| field.magnitude(idx) * w)
            .sum(),
        Norm::L2 => mask
            .entries
            .iter()
            .map(|&(idx, w)| field.magnitude(idx).powi(2) * w)
            .sum::<f64>()
            .sqrt(),
        Norm::LInf => {
            let pts: Box<dyn Iterator<Item = usize>> = if mask.inside.is_empty() {
                Box::new(mask.entries.iter().map(|e| e.0))
            } else {
                Box::new(mask.inside.iter().copied())
            };
            pts.map(|idx| field.magnitude(idx)).fold(0.0, f64::max)
        }
    }
}

/// `L^p` norm of the field over the union of the region's squares.
pub fn region_norm(field: &SpectrogramField, region: &Region, p: Norm) -> Result<f64> {
    let mask = CoverageMask::region(&field.grid, region)?;
    Ok(masked_norm(field, &mask, p))
}

/// `⟨G, F⟩ = ∫ G · conj(F)` over the mask, for two Gabor fields on one grid.
pub fn masked_inner(
    g: &SpectrogramField,
    f: &SpectrogramField,
    mask: &CoverageMask,
) -> Result<Complex64> {
    g.check_same_grid(f)?;
    let (gv, fv) = (g.gabor_values()?, f.gabor_values()?);
    Ok(mask
        .entries
        .iter()
        .map(|&(idx, w)| gv[idx] * fv[idx].conj() * w)
        .sum())
}

fn bilinear_coords(o: f64, d: f64, n: usize, x: f64) -> (usize, f64) {
    if n == 1 {
        return (0, 0.0);
    }
    let fx = ((x - o) / d).clamp(0.0, (n - 1) as f64);
    let i = (fx.floor() as usize).min(n - 2);
    (i, fx - i as f64)
}

/// Bilinear resample onto the local frame of `square`: the result lives on an
/// axis-aligned grid over `[-side/2, side/2]²` with the source spacing, and the
/// value at local `(u, v)` is the source value at `square.to_world(u, v)`.
pub fn resample_to_square(field: &SpectrogramField, square: &Square) -> Result<SpectrogramField> {
    let grid = field.grid;
    if !grid.contains_rect(&square.bbox()) {
        return Err(Error::domain("square leaves the field domain"));
    }
    let h = 0.5 * square.side;
    let nx = (square.side / grid.dx).round() as usize + 1;
    let ny = (square.side / grid.dy).round() as usize + 1;
    let local = Grid2D::new(
        -h,
        -h,
        square.side / (nx - 1).max(1) as f64,
        square.side / (ny - 1).max(1) as f64,
        nx,
        ny,
    )?;
    let weights = |idx: usize| {
        let (u, v) = local.point(idx);
        let (x, y) = square.to_world(u, v);
        let (i, tx) = bilinear_coords(grid.x0, grid.dx, grid.nx, x);
        let (j, ty) = bilinear_coords(grid.y0, grid.dy, grid.ny, y);
        let i1 = (i + 1).min(grid.nx - 1);
        let j1 = (j + 1).min(grid.ny - 1);
        [
            (grid.index(i, j), (1.0 - tx) * (1.0 - ty)),
            (grid.index(i1, j), tx * (1.0 - ty)),
            (grid.index(i, j1), (1.0 - tx) * ty),
            (grid.index(i1, j1), tx * ty),
        ]
    };
    let values = match &field.values {
        FieldValues::Gabor(v) => {
            FieldValues::Gabor(map_range(local.len(), Execution::default(), |idx| {
                weights(idx).iter().map(|&(k, w)| v[k] * w).sum()
            }))
        }
        FieldValues::Spectrogram(v) => {
            FieldValues::Spectrogram(map_range(local.len(), Execution::default(), |idx| {
                weights(idx)
                    .iter()
                    .map(|&(k, w)| v[k] * w)
                    .sum::<f64>()
                    .max(0.0)
            }))
        }
    };
    Ok(SpectrogramField {
        grid: local,
        values,
    })
}
