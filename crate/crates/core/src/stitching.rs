//! Phase retrieval on a cover: local recovery per square, alignment on
//! overlaps, and global synchronisation.

use std::collections::VecDeque;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::engine::{CoverageMask, SpectrogramField};
use crate::error::{Error, Result};
use crate::geometry::{Region, Shape, Square, SquareCover};
use crate::graph::{build_graph_with, WeightedGraph};
use crate::par::{map_range, Execution};
use crate::signal::{fock_point, GaussianMixtureSignal};
use crate::tensor::{
    fd_jet, jet_from_expsum, local_phase_from_modulus_with, LocalJet, SINGULAR_THRESHOLD,
};

/// Below this modulus an alignment coefficient carries no phase.
pub const ALIGNMENT_FLOOR: f64 = 1e-12;
/// Angles tried by the fallback phase vote.
pub const FALLBACK_ANGLES: usize = 3600;

/// Best multiplier `z` with `G ≈ z F` on one square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalAlignment {
    pub square_index: usize,
    pub z: Complex64,
    /// `‖G - z F‖_{L²(Q)}`.
    pub residual: f64,
}

/// Common phase of a family of local alignments.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalAlignment {
    pub c0: Complex64,
    pub tau: Complex64,
    pub per_square: Vec<LocalAlignment>,
}

fn masked_sums(g: &[Complex64], f: &[Complex64], mask: &CoverageMask) -> (Complex64, f64, f64) {
    let mut ip = Complex64::new(0.0, 0.0);
    let (mut nf, mut ng) = (0.0, 0.0);
    for &(idx, w) in mask.entries() {
        ip += g[idx] * f[idx].conj() * w;
        nf += f[idx].norm_sqr() * w;
        ng += g[idx].norm_sqr() * w;
    }
    (ip, nf, ng)
}

fn masked_residual(g: &[Complex64], f: &[Complex64], z: Complex64, mask: &CoverageMask) -> f64 {
    mask.entries()
        .iter()
        .map(|&(idx, w)| (g[idx] - z * f[idx]).norm_sqr() * w)
        .sum::<f64>()
        .sqrt()
}

/// `z = ⟨G, F⟩_{L²(Q)} / ‖F‖²_{L²(Q)}` and the residual `‖G - zF‖_{L²(Q)}`.
pub fn local_align(
    f: &SpectrogramField,
    g: &SpectrogramField,
    square: &Square,
    square_index: usize,
) -> Result<LocalAlignment> {
    if f.grid() != g.grid() {
        return Err(Error::usage("fields live on different grids"));
    }
    let mask = CoverageMask::square(f.grid(), square)?;
    align_on_mask(f.gabor_values()?, g.gabor_values()?, &mask, square_index)
}

fn align_on_mask(
    f: &[Complex64],
    g: &[Complex64],
    mask: &CoverageMask,
    square_index: usize,
) -> Result<LocalAlignment> {
    let (ip, nf, _) = masked_sums(g, f, mask);
    if !(nf > 0.0) {
        return Err(Error::DegenerateSquares {
            indices: vec![square_index],
        });
    }
    let z = ip / nf;
    Ok(LocalAlignment {
        square_index,
        z,
        residual: masked_residual(g, f, z, mask),
    })
}

/// `c0` is the plain mean of the `z_v`; `τ = c0/|c0|`, or when `c0` vanishes
/// the angle maximising `Σ_v w_v Re(τ̄ z_v)` on a grid of 3600 angles
/// (ties go to the smallest angle).
pub fn synchronize(
    alignments: &[LocalAlignment],
    graph: &WeightedGraph,
) -> Result<GlobalAlignment> {
    if alignments.is_empty() {
        return Err(Error::usage("nothing to synchronise"));
    }
    if let Some(a) = alignments.iter().find(|a| a.square_index >= graph.len()) {
        return Err(Error::usage(format!(
            "alignment for square {} is not a graph vertex",
            a.square_index
        )));
    }
    if alignments.iter().all(|a| a.z.norm() < ALIGNMENT_FLOOR) {
        return Err(Error::NoInformation);
    }
    let c0 = alignments.iter().map(|a| a.z).sum::<Complex64>() / alignments.len() as f64;
    let tau = if c0.norm() > ALIGNMENT_FLOOR {
        c0 / c0.norm()
    } else {
        let w = graph.weights();
        let score = |theta: f64| -> f64 {
            let t = Complex64::from_polar(1.0, -theta);
            alignments
                .iter()
                .map(|a| w[a.square_index] * (t * a.z).re)
                .sum()
        };
        let scale: f64 = alignments
            .iter()
            .map(|a| w[a.square_index] * a.z.norm())
            .sum();
        let mut best = (0.0, score(0.0));
        for k in 1..FALLBACK_ANGLES {
            let theta = 2.0 * PI * k as f64 / FALLBACK_ANGLES as f64;
            let s = score(theta);
            if s > best.1 + 1e-12 * scale {
                best = (theta, s);
            }
        }
        Complex64::from_polar(1.0, best.0)
    };
    Ok(GlobalAlignment {
        c0,
        tau,
        per_square: alignments.to_vec(),
    })
}

/// `τ = ⟨G, F⟩_Ω / |⟨G, F⟩_Ω|` and `‖G - τF‖_{L²(Ω)}`.
pub fn min_phase_distance(
    f: &SpectrogramField,
    g: &SpectrogramField,
    region: &Region,
) -> Result<(Complex64, f64)> {
    if f.grid() != g.grid() {
        return Err(Error::usage("fields live on different grids"));
    }
    let mask = CoverageMask::region(f.grid(), region)?;
    min_phase_distance_masked(f.gabor_values()?, g.gabor_values()?, &mask)
}

pub fn min_phase_distance_masked(
    f: &[Complex64],
    g: &[Complex64],
    mask: &CoverageMask,
) -> Result<(Complex64, f64)> {
    let (ip, nf, ng) = masked_sums(g, f, mask);
    if ip.norm() == 0.0 {
        return Ok((Complex64::new(1.0, 0.0), (nf + ng).sqrt()));
    }
    let tau = ip / ip.norm();
    Ok((tau, masked_residual(g, f, tau, mask)))
}

/// Where jets come from.
#[derive(Debug, Clone, Copy)]
pub enum JetSource<'a> {
    /// Exact derivatives from the mixture that produced the spectrogram.
    Analytic(&'a GaussianMixtureSignal),
    /// Central differences of the sampled spectrogram (order ≤ 4).
    FiniteDifference,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetrieveOptions {
    /// Minimal spectrogram value at a jet center.
    pub threshold: f64,
    pub execution: Execution,
}

impl Default for RetrieveOptions {
    fn default() -> Self {
        Self {
            threshold: SINGULAR_THRESHOLD,
            execution: Execution::default(),
        }
    }
}

/// Field recovered on one connected piece of the cover.
#[derive(Debug, Clone, PartialEq)]
pub struct RetrievedComponent {
    pub squares: Vec<usize>,
    /// Gabor field on the input grid, zero outside the piece.
    pub field: SpectrogramField,
    pub alignment: GlobalAlignment,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Retrieval {
    pub components: Vec<RetrievedComponent>,
    /// Jet center of each square in time-frequency coordinates.
    pub centers: Vec<(f64, f64)>,
    /// Phase applied to each square's local field.
    pub phases: Vec<Complex64>,
    pub warnings: Vec<String>,
}

impl Retrieval {
    pub fn is_connected(&self) -> bool {
        self.components.len() == 1
    }

    /// The retrieved field when the cover is connected.
    pub fn field(&self) -> Result<&SpectrogramField> {
        if self.is_connected() {
            Ok(&self.components[0].field)
        } else {
            Err(Error::usage(format!(
                "the cover splits into {} components; use the per-component fields",
                self.components.len()
            )))
        }
    }
}

struct LocalField {
    center: (f64, f64),
    values: Vec<(usize, Complex64)>,
}

/// Recover a Gabor field from its spectrogram on `cover`, up to one unimodular
/// constant per connected piece of the cover.
pub fn retrieve_phase(
    spec: &SpectrogramField,
    cover: &SquareCover,
    source: JetSource<'_>,
    order: usize,
) -> Result<Retrieval> {
    retrieve_phase_with(spec, cover, source, order, RetrieveOptions::default())
}

pub fn retrieve_phase_with(
    spec: &SpectrogramField,
    cover: &SquareCover,
    source: JetSource<'_>,
    order: usize,
    opts: RetrieveOptions,
) -> Result<Retrieval> {
    let s = spec.spectrogram_values()?;
    let grid = *spec.grid();
    let squares = cover.squares();
    let n = squares.len();
    let masks: Vec<CoverageMask> = map_range(n, opts.execution, |i| {
        CoverageMask::square(&grid, &squares[i])
    })
    .into_iter()
    .collect::<Result<_>>()?;

    // jet centers: grid argmax of the spectrogram inside each square
    let centers: Vec<usize> = masks
        .iter()
        .map(|m| {
            let pts: Vec<usize> = if m.inside().is_empty() {
                m.entries().iter().map(|e| e.0).collect()
            } else {
                m.inside().to_vec()
            };
            pts.into_iter()
                .fold((usize::MAX, f64::NEG_INFINITY), |b, i| {
                    if s[i] > b.1 {
                        (i, s[i])
                    } else {
                        b
                    }
                })
                .0
        })
        .collect();
    let weak: Vec<usize> = (0..n)
        .filter(|&i| centers[i] == usize::MAX || !(s[centers[i]] > opts.threshold))
        .collect();
    if !weak.is_empty() {
        return Err(Error::DegenerateSquares { indices: weak });
    }
    let graph = build_graph_with(spec, cover, opts.execution)?;

    let locals: Vec<LocalField> = map_range(n, opts.execution, |i| {
        local_field(
            spec,
            &grid,
            &masks[i],
            centers[i],
            source,
            order,
            opts.threshold,
        )
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let mut phases = vec![Complex64::new(1.0, 0.0); n];
    let mut warnings = Vec::new();
    let comps = graph.components();
    if comps.len() > 1 {
        let msg = format!(
            "multi-component cover: {} disconnected pieces, relative phases between them are not recoverable",
            comps.len()
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }

    let mut components = Vec::with_capacity(comps.len());
    for comp in comps {
        propagate_phases(
            &graph,
            &comp,
            squares,
            &grid,
            &locals,
            &mut phases,
            &mut warnings,
        )?;
        let assembled = assemble(&grid, &comp, &locals, &phases);
        // refine every square against the assembled field, then reassemble
        let mut alignments = Vec::with_capacity(comp.len());
        for &v in &comp {
            let rotated: Vec<Complex64> = dense(&grid, &locals[v], phases[v]);
            let a = align_on_mask(&rotated, &assembled, &masks[v], v)?;
            alignments.push(a);
        }
        for a in &alignments {
            if a.z.norm() > ALIGNMENT_FLOOR {
                phases[a.square_index] *= a.z / a.z.norm();
            }
        }
        let alignment = synchronize(&alignments, &graph)?;
        let field = SpectrogramField::gabor(grid, assemble(&grid, &comp, &locals, &phases))?;
        components.push(RetrievedComponent {
            squares: comp,
            field,
            alignment,
        });
    }

    Ok(Retrieval {
        components,
        centers: locals.iter().map(|l| l.center).collect(),
        phases,
        warnings,
    })
}

fn local_field(
    spec: &SpectrogramField,
    grid: &crate::engine::Grid2D,
    mask: &CoverageMask,
    center_idx: usize,
    source: JetSource<'_>,
    order: usize,
    threshold: f64,
) -> Result<LocalField> {
    let s = spec.spectrogram_values()?;
    let (xc, yc) = grid.point(center_idx);
    let c = fock_point(xc, yc);
    let jet: LocalJet = match source {
        JetSource::Analytic(sig) => jet_from_expsum(
            &sig.bargmann().translated(c),
            Complex64::new(0.0, 0.0),
            order,
        ),
        JetSource::FiniteDifference => {
            let (ic, jc) = ((center_idx / grid.ny) as i64, (center_idx % grid.ny) as i64);
            let reach = 2 * order as i64;
            let reach = if reach == 0 { 0 } else { (reach + 1) / 2 + 2 };
            if ic < reach
                || jc < reach
                || ic + reach >= grid.nx as i64
                || jc + reach >= grid.ny as i64
            {
                return Err(Error::domain(format!(
                    "jet center ({xc}, {yc}) is too close to the grid edge for finite differences"
                )));
            }
            // u = (x - xc) - i (y - yc), so Im u steps against the y index
            fd_jet(Complex64::new(0.0, 0.0), order, grid.dx, grid.dy, |a, b| {
                let idx = grid.index((ic + a) as usize, (jc - b) as usize);
                let (ux, uy) = (a as f64 * grid.dx, b as f64 * grid.dy);
                s[idx] * (PI * (ux * ux + uy * uy)).exp()
            })?
        }
    };
    let idxs: Vec<usize> = mask.entries().iter().map(|e| e.0).collect();
    let us: Vec<Complex64> = idxs
        .iter()
        .map(|&idx| {
            let (x, y) = grid.point(idx);
            fock_point(x, y) - c
        })
        .collect();
    let h = local_phase_from_modulus_with(&jet, &us, threshold)?;
    // G f(x, y) = H(u) exp(π c̄ u + π|c|²/2 - π|z|²/2 - πixy)
    let values = idxs
        .iter()
        .zip(us.iter().zip(h))
        .map(|(&idx, (&u, hu))| {
            let (x, y) = grid.point(idx);
            let z = u + c;
            let e = PI * c.conj() * u
                + Complex64::new(0.5 * PI * (c.norm_sqr() - z.norm_sqr()), -PI * x * y);
            (idx, hu * e.exp())
        })
        .collect();
    Ok(LocalField {
        center: (xc, yc),
        values,
    })
}

fn dense(grid: &crate::engine::Grid2D, local: &LocalField, phase: Complex64) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    for &(idx, v) in &local.values {
        out[idx] = v * phase;
    }
    out
}

fn assemble(
    grid: &crate::engine::Grid2D,
    comp: &[usize],
    locals: &[LocalField],
    phases: &[Complex64],
) -> Vec<Complex64> {
    let mut sum = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut count = vec![0u32; grid.len()];
    for &v in comp {
        for &(idx, val) in &locals[v].values {
            sum[idx] += val * phases[v];
            count[idx] += 1;
        }
    }
    sum.iter()
        .zip(count)
        .map(|(s, c)| if c > 0 { s / c as f64 } else { *s })
        .collect()
}

/// Fix phases along a maximum-weight spanning tree rooted at the heaviest
/// vertex, aligning each child to its parent on their intersection.
fn propagate_phases(
    graph: &WeightedGraph,
    comp: &[usize],
    squares: &[Square],
    grid: &crate::engine::Grid2D,
    locals: &[LocalField],
    phases: &mut [Complex64],
    warnings: &mut Vec<String>,
) -> Result<()> {
    let w = graph.weights();
    let sigma = graph.sigma();
    let root = *comp
        .iter()
        .max_by(|&&a, &&b| w[a].total_cmp(&w[b]).then(b.cmp(&a)))
        .expect("components are nonempty");
    let mut in_tree = vec![false; graph.len()];
    let mut parent = vec![usize::MAX; graph.len()];
    in_tree[root] = true;
    phases[root] = Complex64::new(1.0, 0.0);
    // Prim on -sigma
    let mut order = VecDeque::new();
    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        for &u in comp.iter().filter(|&&u| in_tree[u]) {
            for &v in comp.iter().filter(|&&v| !in_tree[v]) {
                let s = sigma[u][v];
                if s > 0.0 && best.is_none_or(|b| s > b.2) {
                    best = Some((u, v, s));
                }
            }
        }
        let Some((u, v, _)) = best else { break };
        in_tree[v] = true;
        parent[v] = u;
        order.push_back(v);
    }
    for v in order {
        let p = parent[v];
        let mask = CoverageMask::new(grid, Shape::Intersection(&squares[p], &squares[v]))?;
        let fp = dense(grid, &locals[p], phases[p]);
        let fv = dense(grid, &locals[v], Complex64::new(1.0, 0.0));
        match align_on_mask(&fv, &fp, &mask, v) {
            Ok(a) if a.z.norm() > ALIGNMENT_FLOOR => phases[v] = a.z / a.z.norm(),
            _ => {
                let msg =
                    format!("square {v}: no usable overlap with square {p}, phase left unaligned");
                log::warn!("{msg}");
                warnings.push(msg);
            }
        }
    }
    Ok(())
}
