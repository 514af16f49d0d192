use std::f64::consts::PI;

use gabor_phase::cubature::{gauss_rule, ProductRule2D};
use gabor_phase::engine::{
    quadrature_gabor, region_norm, spectrogram, Grid2D, Norm, Signal, SpectrogramField,
};
use gabor_phase::experiments::{linear_fit, planner_sweep, sharpness_curve};
use gabor_phase::geometry::{Region, Square, SquareCover};
use gabor_phase::graph::{
    build_graph, certificate_from_graph, cheeger_inequality_check, WeightedGraph,
};
use gabor_phase::io::{certificate_to_toml, write_field_csv};
use gabor_phase::par::Execution;
use gabor_phase::signal::{
    gabor_closed_form, make_sharpness_pair, GaussianAtom, GaussianMixtureSignal,
};
use gabor_phase::stitching::{min_phase_distance, retrieve_phase, JetSource};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{
    check_list, check_step, load_cover, load_field, load_mixture, load_signal, require,
    ExperimentConfig, JetKind, DEFAULT_ORDER, DEFAULT_STEP,
};
use crate::error::CliError;
use crate::report::ReportBundle;

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Copy)]
pub struct Globals {
    pub grid_step: Option<f64>,
    pub seed: u64,
}

const SHARPNESS_STEP: f64 = 0.02;
const FD_MAX_ORDER: usize = 4;

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn step(cfg: &ExperimentConfig, g: Globals, default: f64) -> Result<f64, CliError> {
    check_step(
        g.grid_step
            .or(cfg.grid.as_ref().and_then(|s| s.step))
            .unwrap_or(default),
    )
}

pub fn transform(cfg: &ExperimentConfig, g: Globals) -> Result<ReportBundle, CliError> {
    let grid = require(&cfg.grid, "[grid]", "transform")?.build(g.grid_step)?;
    let signal = load_signal(require(&cfg.signal, "[signal]", "transform")?, "signal")?;

    let gabor = quadrature_gabor(&signal, &grid)?;
    let spec = spectrogram(&gabor)?;

    let mut report = ReportBundle::new("transform", cfg);
    report.table("gabor.csv", |b| write_field_csv(&gabor, b))?;
    report.table("spectrogram.csv", |b| write_field_csv(&spec, b))?;
    report.set("points", grid.len() as i64);
    report.set("nx", grid.nx as i64);
    report.set("ny", grid.ny as i64);
    report.set("step", grid.dx);
    report.set("max_spectrogram", spec.max_magnitude());
    Ok(report)
}

fn signal_spectrogram(
    signal: &Signal,
    cover: &SquareCover,
    step: f64,
) -> Result<SpectrogramField, CliError> {
    let grid = Grid2D::enclosing(&cover.region().bbox(), step)?;
    Ok(spectrogram(&quadrature_gabor(signal, &grid)?)?)
}

pub fn certify(cfg: &ExperimentConfig, g: Globals) -> Result<ReportBundle, CliError> {
    let cover = load_cover(require(&cfg.cover, "cover", "certify")?)?;
    let (sf, sg) = match (&cfg.spectrogram, &cfg.signal) {
        (Some(pf), None) => {
            let sf = load_field(pf)?;
            let sg = match &cfg.spectrogram_g {
                Some(p) => load_field(p)?,
                None => sf.clone(),
            };
            (sf, sg)
        }
        (None, Some(spec)) => {
            let step = step(cfg, g, DEFAULT_STEP)?;
            let f = load_signal(spec, "signal")?;
            let gs = cfg
                .signal_g
                .as_ref()
                .map(|s| load_signal(s, "signal_g"))
                .transpose()?;
            let sf = signal_spectrogram(&f, &cover, step)?;
            let sg = match gs {
                Some(s) => signal_spectrogram(&s, &cover, step)?,
                None => sf.clone(),
            };
            (sf, sg)
        }
        _ => {
            return Err(invalid(
                "certify needs exactly one of `spectrogram` or [signal]",
            ))
        }
    };
    for field in [&sf, &sg] {
        field.spectrogram_values()?;
    }

    let graph = build_graph(&sf, &cover)?;
    let cert = certificate_from_graph(&graph, &sf, &sg, &cover)?;

    let mut report = ReportBundle::new("certify", cfg);
    report.table("vertices.csv", |b| graph.write_vertices_csv(b))?;
    report.table("edges.csv", |b| graph.write_edges_csv(b))?;
    let text = certificate_to_toml(&cert)?;
    report.table("certificate.toml", |b| {
        b.extend_from_slice(text.as_bytes());
        Ok(())
    })?;
    if cert.is_finite() {
        report.set("bound", "finite");
    } else {
        report.set("bound", "∞");
        report.warn(format!(
            "cover is disconnected ({} components): stability bound is ∞",
            cert.components
        ));
    }
    report.set("bound_cheeger", cert.bound_cheeger);
    report.set("bound_lambda", cert.bound_lambda);
    report.set("lambda", cert.lambda);
    report.set("cheeger", cert.cheeger);
    report.set("m", cert.m);
    report.set("l", cert.l);
    report.set("nu", cert.nu);
    report.set("components", cert.components as i64);
    Ok(report)
}

pub fn sharpness(cfg: &ExperimentConfig, g: Globals) -> Result<ReportBundle, CliError> {
    let a_values = require(&cfg.a_values, "a_values", "sharpness")?;
    check_list(a_values, "a_values", "(0, 3]", |a| a > 0.0 && a <= 3.0)?;
    let step = step(cfg, g, SHARPNESS_STEP)?;

    let curve = sharpness_curve(a_values, step, Execution::default())?;

    let mut report = ReportBundle::new("sharpness", cfg);
    report.rows("sharpness.csv", &curve.rows)?;
    report.set("step", step);
    report.set("slope", curve.fit.slope);
    report.set("slope_over_pi", curve.fit.slope / PI);
    report.set("intercept", curve.fit.intercept);
    report.set("r_squared", curve.fit.r_squared);
    Ok(report)
}

#[derive(Serialize)]
struct PlanRecord {
    epsilon: f64,
    n: usize,
    nodes: usize,
    predicted: f64,
    achieved: f64,
    epsilon4: f64,
    discrete_norm: f64,
    reference_norm: f64,
    within: bool,
}

pub fn plan_sample(cfg: &ExperimentConfig, _g: Globals) -> Result<ReportBundle, CliError> {
    let eps = require(&cfg.epsilons, "epsilons", "plan-sample")?;
    check_list(eps, "epsilons", "(0, 1/2)", |e| e > 0.0 && e < 0.5)?;
    let square = match &cfg.square {
        Some(s) => s.build()?,
        None => Square::unit(0.0, 0.0),
    };
    let mixture = |spec: &crate::config::SignalSpec, key: &str| match load_signal(spec, key)? {
        Signal::Mixture(m) => Ok(m),
        Signal::Sampled(_) => Err(invalid(format!(
            "[{key}] must be a mixture for plan-sample"
        ))),
    };
    let (f, h) = match (&cfg.signal, &cfg.signal_g) {
        (Some(a), Some(b)) => (mixture(a, "signal")?, mixture(b, "signal_g")?),
        (None, None) => {
            let a = cfg.pair_a.unwrap_or(1.0);
            if !(a > 0.0 && a <= 3.0) {
                return Err(invalid(format!("`pair_a` = {a} is outside (0, 3]")));
            }
            make_sharpness_pair(a)?
        }
        _ => {
            return Err(invalid(
                "plan-sample needs both [signal] and [signal_g], or neither",
            ))
        }
    };

    let rows = planner_sweep(&f, &h, &square, eps)?;

    let mut report = ReportBundle::new("plan-sample", cfg);
    let records: Vec<PlanRecord> = rows
        .iter()
        .map(|r| PlanRecord {
            epsilon: r.epsilon,
            n: r.n,
            nodes: r.nodes,
            predicted: r.predicted,
            achieved: r.achieved,
            discrete_norm: r.discrete_norm,
            reference_norm: r.reference_norm,
            epsilon4: r.epsilon.powi(4),
            within: r.achieved <= r.epsilon.powi(4),
        })
        .collect();
    report.rows("planner.csv", &records)?;
    for (k, r) in rows.iter().enumerate() {
        let rule = ProductRule2D::on_square(r.n, &square)?;
        report.table(format!("nodes_{k}.csv"), |b| rule.write_csv(b))?;
    }
    let all_within = records.iter().all(|r| r.within);
    if !all_within {
        report.warn("achieved error exceeds ε⁴ for some tolerance");
    }
    report.set("all_within", all_within);
    report.set(
        "n",
        toml::Value::Array(rows.iter().map(|r| (r.n as i64).into()).collect()),
    );
    let logs: Vec<f64> = rows.iter().map(|r| (1.0 / r.epsilon).ln()).collect();
    if let Ok(fit) = linear_fit(&logs, &rows.iter().map(|r| r.n as f64).collect::<Vec<_>>()) {
        report.set("n_vs_log_inv_eps_slope", fit.slope);
        report.set("n_vs_log_inv_eps_r_squared", fit.r_squared);
    }
    Ok(report)
}

#[derive(Serialize)]
struct OracleRecord {
    component: usize,
    squares: String,
    relative_error: f64,
}

pub fn retrieve(cfg: &ExperimentConfig, g: Globals) -> Result<ReportBundle, CliError> {
    let cover = load_cover(require(&cfg.cover, "cover", "retrieve")?)?;
    let jets = cfg.jets.unwrap_or_default();
    let order = cfg.order.unwrap_or(match jets {
        JetKind::Analytic => DEFAULT_ORDER,
        JetKind::FiniteDifference => FD_MAX_ORDER,
    });
    if jets == JetKind::FiniteDifference && order > FD_MAX_ORDER {
        return Err(invalid(format!(
            "finite-difference jets support order ≤ {FD_MAX_ORDER}, got {order}"
        )));
    }
    let truth = match (&cfg.ground_truth, &cfg.signal) {
        (Some(p), _) => Some(load_mixture(p)?),
        (None, Some(spec)) => match load_signal(spec, "signal")? {
            Signal::Mixture(m) => Some(m),
            Signal::Sampled(_) => None,
        },
        _ => None,
    };
    let spec = match (&cfg.spectrogram, &cfg.signal) {
        (Some(p), None) => load_field(p)?,
        (None, Some(s)) => signal_spectrogram(
            &load_signal(s, "signal")?,
            &cover,
            step(cfg, g, DEFAULT_STEP)?,
        )?,
        _ => {
            return Err(invalid(
                "retrieve needs exactly one of `spectrogram` or [signal]",
            ))
        }
    };
    spec.spectrogram_values()?;
    let source = match (jets, &truth) {
        (JetKind::Analytic, Some(m)) => JetSource::Analytic(m),
        (JetKind::Analytic, None) => {
            return Err(invalid(
                "analytic jets need a mixture (`ground_truth` or [signal] mixture)",
            ))
        }
        (JetKind::FiniteDifference, _) => JetSource::FiniteDifference,
    };

    let retrieval = retrieve_phase(&spec, &cover, source, order)?;

    let mut report = ReportBundle::new("retrieve", cfg);
    let single = retrieval.components.len() == 1;
    let mut oracle = Vec::new();
    for (k, comp) in retrieval.components.iter().enumerate() {
        let name = if single {
            "retrieved.csv".to_string()
        } else {
            format!("retrieved_{k}.csv")
        };
        report.table(name, |b| write_field_csv(&comp.field, b))?;
        if let Some(m) = &truth {
            let grid = *comp.field.grid();
            let exact = SpectrogramField::from_fn(grid, |x, y| gabor_closed_form(m, x, y));
            let region = Region::new(comp.squares.iter().map(|&i| cover.squares()[i]).collect())?;
            let (_, d) = min_phase_distance(&exact, &comp.field, &region)?;
            let norm = region_norm(&exact, &region, Norm::L2)?;
            oracle.push(OracleRecord {
                component: k,
                squares: comp
                    .squares
                    .iter()
                    .map(|i| i.to_string())
                    .collect::<Vec<_>>()
                    .join(" "),
                relative_error: d / norm,
            });
        }
    }
    if !oracle.is_empty() {
        report.rows("oracle.csv", &oracle)?;
        let worst = oracle.iter().map(|r| r.relative_error).fold(0.0, f64::max);
        report.set("max_relative_error", worst);
    }
    for w in &retrieval.warnings {
        report.warnings.push(w.clone());
    }
    report.set("components", retrieval.components.len() as i64);
    report.set("order", order as i64);
    Ok(report)
}

#[derive(Serialize)]
struct CheckRecord {
    check: &'static str,
    value: f64,
    tolerance: f64,
    pass: bool,
}

fn random_mixture(rng: &mut ChaCha8Rng, atoms: usize) -> Result<GaussianMixtureSignal, CliError> {
    let atoms = (0..atoms)
        .map(|_| {
            GaussianAtom::new(
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            )
        })
        .collect::<gabor_phase::Result<Vec<_>>>()?;
    Ok(GaussianMixtureSignal::new(atoms)?)
}

/// Quick randomized checks of the core numerics, seeded by `--seed`.
pub fn selftest(cfg: &ExperimentConfig, g: Globals) -> Result<ReportBundle, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
    let mut checks = Vec::new();

    let sig = random_mixture(&mut rng, 3)?;
    let grid = Grid2D::spanning(-1.0, 1.0, -1.0, 1.0, 0.1)?;
    let field = quadrature_gabor(&sig, &grid)?;
    let err = (0..grid.len())
        .map(|i| {
            let (x, y) = grid.point(i);
            let v = field.gabor_values().map(|v| v[i]).unwrap_or_default();
            (v - gabor_closed_form(&sig, x, y)).norm()
        })
        .fold(0.0, f64::max);
    checks.push(("closed_form_agreement", err, 1e-8));

    let mut worst: f64 = 0.0;
    for n in 1..=12 {
        let rule = gauss_rule(n, 1.0)?;
        for p in 0..2 * n {
            let exact = if p % 2 == 0 {
                2.0 / (p as f64 + 1.0)
            } else {
                0.0
            };
            worst = worst.max((rule.integrate(|x| x.powi(p as i32)) - exact).abs());
        }
    }
    checks.push(("gauss_exactness", worst, 1e-12));

    let mut violations = 0.0;
    for _ in 0..10 {
        let n = rng.gen_range(2..=8);
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..2.0)).collect();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if j == i + 1 || rng.gen_bool(0.4) {
                    edges.push((i, j, rng.gen_range(0.01..1.0)));
                }
            }
        }
        let graph = WeightedGraph::from_edges(w, &edges)?;
        if cheeger_inequality_check(&graph).is_err() {
            violations += 1.0;
        }
    }
    checks.push(("cheeger_inequality_violations", violations, 0.0));

    let atom = random_mixture(&mut rng, 1)?;
    let cover = SquareCover::grid((0.0, 0.0), 2, 2, 0.5)?;
    let grid = Grid2D::enclosing(&cover.region().bbox(), 0.05)?;
    let exact = SpectrogramField::from_fn(grid, |x, y| gabor_closed_form(&atom, x, y));
    let got = retrieve_phase(
        &spectrogram(&exact)?,
        &cover,
        JetSource::Analytic(&atom),
        DEFAULT_ORDER,
    )?;
    let region = cover.region();
    let (_, d) = min_phase_distance(&exact, got.field()?, &region)?;
    checks.push((
        "retrieval_relative_error",
        d / region_norm(&exact, &region, Norm::L2)?,
        1e-3,
    ));

    let records: Vec<CheckRecord> = checks
        .into_iter()
        .map(|(check, value, tolerance)| CheckRecord {
            check,
            value,
            tolerance,
            pass: value <= tolerance,
        })
        .collect();
    let mut report = ReportBundle::new("selftest", cfg);
    for r in &records {
        println!(
            "{:<32} {} {:e} (tolerance {:e})",
            r.check,
            if r.pass { "PASS" } else { "FAIL" },
            r.value,
            r.tolerance
        );
    }
    report.rows("selftest.csv", &records)?;
    let failed = records.iter().filter(|r| !r.pass).count();
    report.set("seed", g.seed.to_string());
    report.set("failed", failed as i64);
    Ok(report)
}
