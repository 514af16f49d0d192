//! File formats: fields and samples as CSV, signals and reports as TOML.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cubature::SamplingPlan;
use crate::engine::{FieldValues, Grid2D, SampledSignal, SpectrogramField};
use crate::error::{Error, Result};
use crate::geometry::{Square, SquareCover};
use crate::graph::StabilityCertificate;
use crate::signal::{GaussianAtom, GaussianMixtureSignal};

const GRID_TOL: f64 = 1e-9;

fn csv_err(context: &str) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::parse(context, e.to_string())
}

/// Writes `x,y,re,im` for Gabor fields and `x,y,s` for spectrograms, in grid order.
pub fn write_field_csv<W: Write>(field: &SpectrogramField, out: W) -> Result<()> {
    let err = csv_err("field csv");
    let mut wr = csv::Writer::from_writer(out);
    let grid = field.grid();
    match field.values() {
        FieldValues::Gabor(v) => {
            wr.write_record(["x", "y", "re", "im"]).map_err(&err)?;
            for (idx, z) in v.iter().enumerate() {
                let (x, y) = grid.point(idx);
                wr.serialize((x, y, z.re, z.im)).map_err(&err)?;
            }
        }
        FieldValues::Spectrogram(v) => {
            wr.write_record(["x", "y", "s"]).map_err(&err)?;
            for (idx, s) in v.iter().enumerate() {
                let (x, y) = grid.point(idx);
                wr.serialize((x, y, s)).map_err(&err)?;
            }
        }
    }
    wr.flush()?;
    Ok(())
}

fn parse_f64(context: &str, column: &str, row: usize, raw: Option<&str>) -> Result<f64> {
    let raw =
        raw.ok_or_else(|| Error::parse(context, format!("row {row}: missing column `{column}`")))?;
    raw.trim().parse::<f64>().map_err(|_| {
        Error::parse(
            context,
            format!("row {row}: column `{column}` is not a number: {raw:?}"),
        )
    })
}

fn column_index(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h.trim() == name)
}

/// Strictly increasing distinct values, merged within `GRID_TOL`.
fn distinct_sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= GRID_TOL * (1.0 + b.abs()));
    v
}

fn uniform_step(context: &str, axis: &str, v: &[f64]) -> Result<f64> {
    if v.len() < 2 {
        return Ok(1.0);
    }
    let step = (v[v.len() - 1] - v[0]) / (v.len() - 1) as f64;
    for (k, &t) in v.iter().enumerate() {
        if (t - (v[0] + k as f64 * step)).abs() > 1e-6 * step {
            return Err(Error::parse(
                context,
                format!("{axis} coordinates are not uniformly spaced"),
            ));
        }
    }
    Ok(step)
}

/// Reads a field written by [`write_field_csv`], recovering its grid.
pub fn read_field_csv<R: Read>(input: R) -> Result<SpectrogramField> {
    const CTX: &str = "field csv";
    let mut rd = csv::Reader::from_reader(input);
    let headers = rd.headers().map_err(csv_err(CTX))?.clone();
    let (ix, iy) = match (column_index(&headers, "x"), column_index(&headers, "y")) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::parse(CTX, "header must contain `x` and `y`")),
    };
    let gabor_cols = (column_index(&headers, "re"), column_index(&headers, "im"));
    let s_col = column_index(&headers, "s");
    let gabor = match (gabor_cols, s_col) {
        ((Some(_), Some(_)), None) => true,
        ((None, None), Some(_)) => false,
        _ => return Err(Error::parse(CTX, "header must be `x,y,re,im` or `x,y,s`")),
    };
    let mut points = Vec::new();
    let mut values = Vec::new();
    for (row, rec) in rd.records().enumerate() {
        let rec = rec.map_err(csv_err(CTX))?;
        let row = row + 1;
        let x = parse_f64(CTX, "x", row, rec.get(ix))?;
        let y = parse_f64(CTX, "y", row, rec.get(iy))?;
        let v = if gabor {
            let re = parse_f64(CTX, "re", row, rec.get(gabor_cols.0.unwrap_or(0)))?;
            let im = parse_f64(CTX, "im", row, rec.get(gabor_cols.1.unwrap_or(0)))?;
            Complex64::new(re, im)
        } else {
            Complex64::new(parse_f64(CTX, "s", row, rec.get(s_col.unwrap_or(0)))?, 0.0)
        };
        points.push((x, y));
        values.push(v);
    }
    if points.is_empty() {
        return Err(Error::parse(CTX, "no data rows"));
    }
    let xs = distinct_sorted(points.iter().map(|p| p.0).collect());
    let ys = distinct_sorted(points.iter().map(|p| p.1).collect());
    if xs.len() * ys.len() != points.len() {
        return Err(Error::parse(
            CTX,
            format!(
                "{} rows do not form a {}x{} grid",
                points.len(),
                xs.len(),
                ys.len()
            ),
        ));
    }
    let dx = uniform_step(CTX, "x", &xs)?;
    let dy = uniform_step(CTX, "y", &ys)?;
    let grid = Grid2D::new(xs[0], ys[0], dx, dy, xs.len(), ys.len())?;
    for (idx, &(x, y)) in points.iter().enumerate() {
        let (gx, gy) = grid.point(idx);
        if (gx - x).abs() > 1e-6 * dx || (gy - y).abs() > 1e-6 * dy {
            return Err(Error::parse(
                CTX,
                format!("row {} is out of grid order", idx + 1),
            ));
        }
    }
    if gabor {
        SpectrogramField::gabor(grid, values)
    } else {
        SpectrogramField::spectrogram(grid, values.into_iter().map(|v| v.re).collect())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomRecord {
    re: f64,
    #[serde(default)]
    im: f64,
    #[serde(default)]
    shift: f64,
    #[serde(default)]
    modulation: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MixtureFile {
    atoms: Vec<AtomRecord>,
}

/// Error message prefixed with the offending key when the span points into a `key = value` line.
fn toml_error(context: &str, text: &str, e: &toml::de::Error) -> Error {
    let key = e.span().and_then(|span| {
        let start = text[..span.start].rfind('\n').map_or(0, |k| k + 1);
        let line = text[start..].lines().next()?;
        let (key, _) = line.split_once('=')?;
        Some(key.trim().to_string())
    });
    match key {
        Some(key) if !key.is_empty() => {
            Error::parse(context, format!("field `{key}`: {}", e.message()))
        }
        _ => Error::parse(context, e.message()),
    }
}

/// Parses `[[atoms]]` tables with keys `re`, `im`, `shift`, `modulation`.
pub fn parse_mixture_toml(text: &str) -> Result<GaussianMixtureSignal> {
    let file: MixtureFile =
        toml::from_str(text).map_err(|e| toml_error("mixture toml", text, &e))?;
    let atoms = file
        .atoms
        .iter()
        .enumerate()
        .map(|(k, a)| {
            GaussianAtom::new(Complex64::new(a.re, a.im), a.shift, a.modulation)
                .map_err(|e| Error::parse("mixture toml", format!("atoms[{k}]: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    GaussianMixtureSignal::new(atoms)
}

pub fn mixture_to_toml(sig: &GaussianMixtureSignal) -> Result<String> {
    let file = MixtureFile {
        atoms: sig
            .atoms()
            .iter()
            .map(|a| AtomRecord {
                re: a.amplitude.re,
                im: a.amplitude.im,
                shift: a.shift,
                modulation: a.modulation,
            })
            .collect(),
    };
    toml::to_string(&file).map_err(|e| Error::parse("mixture toml", e.to_string()))
}

/// Reads uniformly spaced samples `t,re,im`.
pub fn read_sampled_csv<R: Read>(input: R) -> Result<SampledSignal> {
    const CTX: &str = "sampled csv";
    let mut rd = csv::Reader::from_reader(input);
    let headers = rd.headers().map_err(csv_err(CTX))?.clone();
    let cols: Vec<usize> = ["t", "re", "im"]
        .iter()
        .map(|c| {
            column_index(&headers, c)
                .ok_or_else(|| Error::parse(CTX, format!("missing column `{c}`")))
        })
        .collect::<Result<_>>()?;
    let mut ts = Vec::new();
    let mut samples = Vec::new();
    for (row, rec) in rd.records().enumerate() {
        let rec = rec.map_err(csv_err(CTX))?;
        let row = row + 1;
        ts.push(parse_f64(CTX, "t", row, rec.get(cols[0]))?);
        samples.push(Complex64::new(
            parse_f64(CTX, "re", row, rec.get(cols[1]))?,
            parse_f64(CTX, "im", row, rec.get(cols[2]))?,
        ));
    }
    if ts.len() < 2 {
        return Err(Error::parse(CTX, "need at least two samples"));
    }
    let dt = (ts[ts.len() - 1] - ts[0]) / (ts.len() - 1) as f64;
    if !(dt > 0.0) {
        return Err(Error::parse(CTX, "times must increase"));
    }
    for (k, &t) in ts.iter().enumerate() {
        if (t - (ts[0] + k as f64 * dt)).abs() > 1e-6 * dt {
            return Err(Error::parse(
                CTX,
                format!("row {}: sample times are not uniformly spaced", k + 1),
            ));
        }
    }
    SampledSignal::new(samples, ts[0], dt)
}

pub fn write_sampled_csv<W: Write>(sig: &SampledSignal, out: W) -> Result<()> {
    let err = csv_err("sampled csv");
    let mut wr = csv::Writer::from_writer(out);
    wr.write_record(["t", "re", "im"]).map_err(&err)?;
    for (k, z) in sig.samples().iter().enumerate() {
        wr.serialize((sig.time(k), z.re, z.im)).map_err(&err)?;
    }
    wr.flush()?;
    Ok(())
}

/// Reads unit squares from `cx,cy[,rotation]`.
pub fn read_cover_csv<R: Read>(input: R) -> Result<SquareCover> {
    const CTX: &str = "cover csv";
    let mut rd = csv::Reader::from_reader(input);
    let headers = rd.headers().map_err(csv_err(CTX))?.clone();
    let (icx, icy) = match (column_index(&headers, "cx"), column_index(&headers, "cy")) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::parse(CTX, "header must contain `cx` and `cy`")),
    };
    let irot = column_index(&headers, "rotation");
    let mut squares = Vec::new();
    for (row, rec) in rd.records().enumerate() {
        let rec = rec.map_err(csv_err(CTX))?;
        let row = row + 1;
        let cx = parse_f64(CTX, "cx", row, rec.get(icx))?;
        let cy = parse_f64(CTX, "cy", row, rec.get(icy))?;
        let rot = match irot {
            Some(i) => parse_f64(CTX, "rotation", row, rec.get(i))?,
            None => 0.0,
        };
        squares.push(
            Square::new((cx, cy), 1.0, rot)
                .map_err(|e| Error::parse(CTX, format!("row {row}: {e}")))?,
        );
    }
    SquareCover::new(squares)
}

pub fn write_cover_csv<W: Write>(cover: &SquareCover, out: W) -> Result<()> {
    let err = csv_err("cover csv");
    let mut wr = csv::Writer::from_writer(out);
    wr.write_record(["cx", "cy", "rotation"]).map_err(&err)?;
    for sq in cover.squares() {
        wr.serialize((sq.center.0, sq.center.1, sq.rotation))
            .map_err(&err)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn certificate_to_toml(cert: &StabilityCertificate) -> Result<String> {
    toml::to_string(cert).map_err(|e| Error::parse("certificate toml", e.to_string()))
}

pub fn certificate_from_toml(text: &str) -> Result<StabilityCertificate> {
    toml::from_str(text).map_err(|e| Error::parse("certificate toml", e.message().to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct PlanSummary {
    n: usize,
    nodes: usize,
    half_width: f64,
    epsilon: f64,
    kappa: f64,
    predicted_error: f64,
}

/// Plan summary without the node list, which goes to [`ProductRule2D::write_csv`].
pub fn plan_to_toml(plan: &SamplingPlan) -> Result<String> {
    let summary = PlanSummary {
        n: plan.n,
        nodes: plan.rule.len(),
        half_width: plan.rule.base.s,
        epsilon: plan.epsilon,
        kappa: plan.kappa,
        predicted_error: plan.predicted_error,
    };
    toml::to_string(&summary).map_err(|e| Error::parse("plan toml", e.to_string()))
}

/// Reads `x,y,w` rows as written by [`ProductRule2D::write_csv`].
pub fn read_nodes_csv<R: Read>(input: R) -> Result<Vec<(f64, f64, f64)>> {
    const CTX: &str = "nodes csv";
    let mut rd = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for rec in rd.deserialize() {
        out.push(rec.map_err(csv_err(CTX))?);
    }
    Ok(out)
}
