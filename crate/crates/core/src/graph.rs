//! Weighted overlap graphs of square covers and their connectivity constants.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::engine::{masked_norm, CoverageMask, Norm, SpectrogramField};
use crate::error::{Error, Result};
use crate::geometry::{Shape, SquareCover};
use crate::par::{map_range, Execution};

/// Largest vertex count for which the Cheeger constant is enumerated exactly.
pub const EXACT_CHEEGER_LIMIT: usize = 20;
/// Slack allowed when checking the two-sided Cheeger inequality.
pub const CHEEGER_SLACK: f64 = 1e-9;

/// Vertices with positive weights `w` and symmetric edge weights `sigma`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    w: Vec<f64>,
    sigma: Vec<Vec<f64>>,
}

impl WeightedGraph {
    pub fn new(w: Vec<f64>, sigma: Vec<Vec<f64>>) -> Result<Self> {
        let n = w.len();
        if n == 0 {
            return Err(Error::domain("graph needs at least one vertex"));
        }
        if sigma.len() != n || sigma.iter().any(|row| row.len() != n) {
            return Err(Error::usage("edge weight matrix must be n x n"));
        }
        let degenerate: Vec<usize> = (0..n)
            .filter(|&i| !(w[i] > 0.0 && w[i].is_finite()))
            .collect();
        if !degenerate.is_empty() {
            return Err(Error::DegenerateSquares {
                indices: degenerate,
            });
        }
        for i in 0..n {
            if sigma[i][i] != 0.0 {
                return Err(Error::domain(format!(
                    "edge weight matrix has nonzero diagonal at {i}"
                )));
            }
            for j in 0..i {
                let (a, b) = (sigma[i][j], sigma[j][i]);
                if !(a >= 0.0 && a.is_finite()) {
                    return Err(Error::domain(format!(
                        "edge weight ({i}, {j}) = {a} is not a finite nonnegative number"
                    )));
                }
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::domain(format!(
                        "edge weights are not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { w, sigma })
    }

    /// Graph with edges given as `(i, j, sigma)` triples.
    pub fn from_edges(w: Vec<f64>, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let n = w.len();
        let mut sigma = vec![vec![0.0; n]; n];
        for &(i, j, s) in edges {
            if i >= n || j >= n || i == j {
                return Err(Error::domain(format!("invalid edge ({i}, {j})")));
            }
            sigma[i][j] = s;
            sigma[j][i] = s;
        }
        Self::new(w, sigma)
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn sigma(&self) -> &[Vec<f64>] {
        &self.sigma
    }

    /// `dg(v) = Σ_u σ(v, u)`.
    pub fn degree(&self, v: usize) -> f64 {
        self.sigma[v].iter().sum()
    }

    /// `max_v dg(v) / w(v)`.
    pub fn delta0(&self) -> f64 {
        (0..self.len())
            .map(|v| self.degree(v) / self.w[v])
            .fold(0.0, f64::max)
    }

    /// `L = D - A`.
    pub fn laplacian(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut l = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                l[i][j] = if i == j {
                    self.degree(i)
                } else {
                    -self.sigma[i][j]
                };
            }
        }
        l
    }

    /// `W^{-1/2} L W^{-1/2}`.
    pub fn normalized_laplacian(&self) -> Vec<Vec<f64>> {
        let mut l = self.laplacian();
        let s: Vec<f64> = self.w.iter().map(|w| w.sqrt().recip()).collect();
        for (i, row) in l.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v *= s[i] * s[j];
            }
        }
        l
    }

    /// Connected components of the support of `sigma`, each sorted.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut label = vec![usize::MAX; n];
        let mut out = Vec::new();
        for start in 0..n {
            if label[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut stack = vec![start];
            let mut comp = Vec::new();
            label[start] = id;
            while let Some(v) = stack.pop() {
                comp.push(v);
                for u in 0..n {
                    if self.sigma[v][u] > 0.0 && label[u] == usize::MAX {
                        label[u] = id;
                        stack.push(u);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() == 1
    }

    /// `σ(∂S) / min(w(S), w(V∖S))` for the vertex set encoded in `inside`.
    pub fn cut_ratio(&self, inside: &[bool]) -> f64 {
        let n = self.len();
        let mut cut = 0.0;
        let (mut ws, mut wc) = (0.0, 0.0);
        for i in 0..n {
            if inside[i] {
                ws += self.w[i];
                for j in 0..n {
                    if !inside[j] {
                        cut += self.sigma[i][j];
                    }
                }
            } else {
                wc += self.w[i];
            }
        }
        cut / ws.min(wc)
    }

    /// Vertex list `i,w`.
    pub fn write_vertices_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(out);
        wr.write_record(["i", "w"]).map_err(csv_err)?;
        for (i, w) in self.w.iter().enumerate() {
            wr.serialize((i, w)).map_err(csv_err)?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Edge list `i,j,sigma` with `i < j`, positive weights only.
    pub fn write_edges_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(out);
        wr.write_record(["i", "j", "sigma"]).map_err(csv_err)?;
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                if self.sigma[i][j] > 0.0 {
                    wr.serialize((i, j, self.sigma[i][j])).map_err(csv_err)?;
                }
            }
        }
        wr.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::parse("csv output", e.to_string())
}

/// `w_i = ‖S f‖_{L¹(Q_i)}` and `σ_ij = ‖S f‖²_{L¹(Q_i ∩ Q_j)}`.
pub fn build_graph(spec: &SpectrogramField, cover: &SquareCover) -> Result<WeightedGraph> {
    build_graph_with(spec, cover, Execution::default())
}

pub fn build_graph_with(
    spec: &SpectrogramField,
    cover: &SquareCover,
    exec: Execution,
) -> Result<WeightedGraph> {
    spec.spectrogram_values()?;
    let grid = spec.grid();
    let squares = cover.squares();
    let n = squares.len();
    let masks = map_range(n, exec, |i| CoverageMask::square(grid, &squares[i]));
    let mut w = Vec::with_capacity(n);
    for m in masks {
        w.push(masked_norm(spec, &m?, Norm::L1));
    }
    let degenerate: Vec<usize> = (0..n).filter(|&i| !(w[i] > 0.0)).collect();
    if !degenerate.is_empty() {
        return Err(Error::DegenerateSquares {
            indices: degenerate,
        });
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .filter(|&(i, j)| squares[i].bbox().intersect(&squares[j].bbox()).is_some())
        .collect();
    let values = map_range(pairs.len(), exec, |p| {
        let (i, j) = pairs[p];
        let mask = CoverageMask::new(grid, Shape::Intersection(&squares[i], &squares[j]))?;
        let e = masked_norm(spec, &mask, Norm::L1);
        Ok::<f64, Error>(e * e)
    });
    let mut sigma = vec![vec![0.0; n]; n];
    for (&(i, j), v) in pairs.iter().zip(values) {
        let v = v?;
        sigma[i][j] = v;
        sigma[j][i] = v;
    }
    WeightedGraph::new(w, sigma)
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues in ascending order and the matching eigenvectors.
pub fn symmetric_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let frob: f64 = m.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * frob || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i][i].total_cmp(&m[j][j]));
    let values = order.iter().map(|&i| m[i][i]).collect();
    let vectors = order
        .iter()
        .map(|&i| (0..n).map(|k| v[k][i]).collect())
        .collect();
    (values, vectors)
}

/// Second-smallest eigenvalue of `W^{-1/2} L W^{-1/2}`.
pub fn algebraic_connectivity(g: &WeightedGraph) -> Result<f64> {
    if g.len() < 2 {
        return Err(Error::domain(
            "algebraic connectivity needs at least two vertices",
        ));
    }
    if !g.is_connected() {
        return Ok(0.0);
    }
    let (values, _) = symmetric_eigen(&g.normalized_laplacian());
    Ok(values[1].max(0.0))
}

/// Fiedler-type vector `W^{-1/2} y` with `y` the second eigenvector of the
/// normalised Laplacian.
pub fn fiedler_vector(g: &WeightedGraph) -> Result<Vec<f64>> {
    if g.len() < 2 {
        return Err(Error::domain(
            "a Fiedler vector needs at least two vertices",
        ));
    }
    let (_, vectors) = symmetric_eigen(&g.normalized_laplacian());
    Ok(vectors[1]
        .iter()
        .zip(g.weights())
        .map(|(y, w)| y / w.sqrt())
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheegerMethod {
    ExactEnumeration,
    SpectralSweep,
}

/// Cheeger constant with a minimising vertex set.
#[derive(Debug, Clone, PartialEq)]
pub struct CheegerResult {
    pub value: f64,
    pub witness: Vec<usize>,
    pub method: CheegerMethod,
}

/// `h = min_S σ(∂S) / min(w(S), w(V∖S))` over nonempty proper subsets `S`.
pub fn cheeger_constant(g: &WeightedGraph, method: CheegerMethod) -> Result<CheegerResult> {
    let n = g.len();
    if n < 2 {
        return Err(Error::domain(
            "the Cheeger constant needs at least two vertices",
        ));
    }
    let comps = g.components();
    if comps.len() > 1 {
        return Ok(CheegerResult {
            value: 0.0,
            witness: comps[0].clone(),
            method,
        });
    }
    match method {
        CheegerMethod::ExactEnumeration => cheeger_exact(g),
        CheegerMethod::SpectralSweep => cheeger_sweep(g),
    }
}

fn cheeger_exact(g: &WeightedGraph) -> Result<CheegerResult> {
    let n = g.len();
    if n > EXACT_CHEEGER_LIMIT {
        return Err(Error::Resource(format!(
            "exact Cheeger enumeration is limited to {EXACT_CHEEGER_LIMIT} vertices, got {n}"
        )));
    }
    // subsets avoiding the last vertex represent every cut exactly once
    let total: u64 = 1 << (n - 1);
    let chunk: u64 = 1 << 12;
    let chunks = total.div_ceil(chunk) as usize;
    let best = map_range(chunks, Execution::default(), |c| {
        let lo = (c as u64 * chunk).max(1);
        let hi = ((c as u64 + 1) * chunk).min(total);
        let mut inside = vec![false; n];
        let mut best = (f64::INFINITY, 0u64);
        for mask in lo..hi {
            for (i, slot) in inside.iter_mut().enumerate() {
                *slot = mask >> i & 1 == 1;
            }
            let r = g.cut_ratio(&inside);
            if r < best.0 {
                best = (r, mask);
            }
        }
        best
    })
    .into_iter()
    .fold((f64::INFINITY, 0u64), |a, b| if b.0 < a.0 { b } else { a });
    Ok(CheegerResult {
        value: best.0,
        witness: (0..n).filter(|&i| best.1 >> i & 1 == 1).collect(),
        method: CheegerMethod::ExactEnumeration,
    })
}

fn cheeger_sweep(g: &WeightedGraph) -> Result<CheegerResult> {
    let n = g.len();
    let z = fiedler_vector(g)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| z[a].total_cmp(&z[b]).then(a.cmp(&b)));
    let mut inside = vec![false; n];
    let mut best = (f64::INFINITY, 0usize);
    for (k, &v) in order.iter().enumerate().take(n - 1) {
        inside[v] = true;
        let r = g.cut_ratio(&inside);
        if r < best.0 {
            best = (r, k + 1);
        }
    }
    let mut witness: Vec<usize> = order[..best.1].to_vec();
    witness.sort_unstable();
    Ok(CheegerResult {
        value: best.0,
        witness,
        method: CheegerMethod::SpectralSweep,
    })
}

/// `λ`, `h`, `δ₀` and the outcome of the Cheeger inequality check.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectivityReport {
    pub lambda: f64,
    pub cheeger: f64,
    pub cheeger_method: CheegerMethod,
    pub witness: Vec<usize>,
    pub delta0: f64,
}

/// Compute `λ`, `h` (exactly when `n ≤ 20`) and `δ₀`, and verify
/// `2h ≥ λ ≥ h² / (2δ₀)`. With a sweep estimate of `h` only the left
/// inequality is guaranteed and only it is checked.
pub fn cheeger_inequality_check(g: &WeightedGraph) -> Result<ConnectivityReport> {
    let lambda = algebraic_connectivity(g)?;
    let method = if g.len() <= EXACT_CHEEGER_LIMIT {
        CheegerMethod::ExactEnumeration
    } else {
        CheegerMethod::SpectralSweep
    };
    let h = cheeger_constant(g, method)?;
    let delta0 = g.delta0();
    let slack = CHEEGER_SLACK * (1.0 + lambda.abs());
    if 2.0 * h.value < lambda - slack {
        return Err(Error::Invariant(format!(
            "Cheeger upper bound fails: 2h = {} < lambda = {lambda}",
            2.0 * h.value
        )));
    }
    if method == CheegerMethod::ExactEnumeration && delta0 > 0.0 {
        let lower = h.value * h.value / (2.0 * delta0);
        if lambda < lower - slack {
            return Err(Error::Invariant(format!(
                "Cheeger lower bound fails: lambda = {lambda} < h^2/(2 delta0) = {lower}"
            )));
        }
    }
    Ok(ConnectivityReport {
        lambda,
        cheeger: h.value,
        cheeger_method: method,
        witness: h.witness,
        delta0,
    })
}

/// Quantities entering the stability bound for a cover, with unit constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityCertificate {
    /// `‖Sf‖_∞ + ‖Sg‖_∞` over the field grids.
    pub k: f64,
    /// `Σ_Q ‖Sf‖_{L¹(Q)}^{-2}`.
    pub m: f64,
    /// Maximal overlap multiplicity.
    pub l: f64,
    /// Number of squares.
    pub nu: f64,
    pub vol_omega: f64,
    pub lambda: f64,
    pub cheeger: f64,
    pub delta0: f64,
    pub bound_lambda: f64,
    pub bound_cheeger: f64,
    /// Constant multiplying both bounds; always 1.
    pub constant: f64,
    pub cheeger_method: Option<CheegerMethod>,
    /// Set for a single square, where the bound is the one-square estimate.
    pub base_case: bool,
    pub components: usize,
}

impl StabilityCertificate {
    /// False when the measurements split into disconnected pieces.
    pub fn is_finite(&self) -> bool {
        self.bound_cheeger.is_finite() && self.bound_lambda.is_finite()
    }
}

/// Certificate for `(f, g)` on `cover`; see [`certificate_from_graph`].
pub fn certificate(
    spec_f: &SpectrogramField,
    spec_g: &SpectrogramField,
    cover: &SquareCover,
) -> Result<StabilityCertificate> {
    let graph = build_graph(spec_f, cover)?;
    certificate_from_graph(&graph, spec_f, spec_g, cover)
}

pub fn certificate_from_graph(
    graph: &WeightedGraph,
    spec_f: &SpectrogramField,
    spec_g: &SpectrogramField,
    cover: &SquareCover,
) -> Result<StabilityCertificate> {
    spec_f.spectrogram_values()?;
    spec_g.spectrogram_values()?;
    if graph.len() != cover.len() {
        return Err(Error::usage("graph and cover sizes differ"));
    }
    let k = spec_f.max_magnitude() + spec_g.max_magnitude();
    let m: f64 = graph.weights().iter().map(|w| w.powi(-2)).sum();
    let region = cover.region();
    let l = region.max_multiplicity() as f64;
    let nu = cover.len() as f64;
    let vol = region.area();
    if cover.len() == 1 {
        let bound = (k / graph.weights()[0]).sqrt();
        return Ok(StabilityCertificate {
            k,
            m,
            l,
            nu,
            vol_omega: vol,
            lambda: f64::INFINITY,
            cheeger: f64::INFINITY,
            delta0: 0.0,
            bound_lambda: bound,
            bound_cheeger: bound,
            constant: 1.0,
            cheeger_method: None,
            base_case: true,
            components: 1,
        });
    }
    let report = cheeger_inequality_check(graph)?;
    let components = graph.components().len();
    let head = k * m.sqrt() * l.sqrt();
    let tail = k * nu.powf(1.5) * l.sqrt();
    let assemble = |factor: f64| {
        if factor.is_finite() {
            (head + factor * tail + vol.sqrt()).sqrt()
        } else {
            f64::INFINITY
        }
    };
    let inv_lambda = if report.lambda > 0.0 {
        report.lambda.recip()
    } else {
        f64::INFINITY
    };
    let cheeger_factor = if report.cheeger > 0.0 {
        report.delta0 / (report.cheeger * report.cheeger)
    } else {
        f64::INFINITY
    };
    Ok(StabilityCertificate {
        k,
        m,
        l,
        nu,
        vol_omega: vol,
        lambda: report.lambda,
        cheeger: report.cheeger,
        delta0: report.delta0,
        bound_lambda: assemble(inv_lambda),
        bound_cheeger: assemble(cheeger_factor),
        constant: 1.0,
        cheeger_method: Some(report.cheeger_method),
        base_case: false,
        components,
    })
}
