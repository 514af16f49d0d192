//! Experiment configuration: one TOML file per run, paths relative to the file.

use std::path::{Path, PathBuf};

use gabor_phase::engine::{Grid2D, Signal};
use gabor_phase::geometry::{Square, SquareCover};
use gabor_phase::signal::GaussianMixtureSignal;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Rectangular sampling grid in time-frequency units.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub step: Option<f64>,
}

/// Either `mixture = "file.toml"` or `sampled = "file.csv"`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalSpec {
    pub mixture: Option<PathBuf>,
    pub sampled: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SquareSpec {
    pub center: [f64; 2],
    #[serde(default = "unit")]
    pub side: f64,
    /// Radians.
    #[serde(default)]
    pub rotation: f64,
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JetKind {
    #[default]
    Analytic,
    FiniteDifference,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Spectrogram CSV for `f` (certify, retrieve).
    pub spectrogram: Option<PathBuf>,
    /// Spectrogram CSV for `g` (certify).
    pub spectrogram_g: Option<PathBuf>,
    /// Cover CSV with `cx,cy[,rotation]` rows.
    pub cover: Option<PathBuf>,
    /// Mixture used for analytic jets and the oracle comparison (retrieve).
    pub ground_truth: Option<PathBuf>,
    pub jets: Option<JetKind>,
    /// Jet order.
    pub order: Option<usize>,
    /// Sharpness parameters, each in (0, 3].
    pub a_values: Option<Vec<f64>>,
    /// Planner tolerances, each in (0, 1/2).
    pub epsilons: Option<Vec<f64>>,
    /// Sharpness pair parameter used by plan-sample when no signals are given.
    pub pair_a: Option<f64>,
    pub signal: Option<SignalSpec>,
    pub signal_g: Option<SignalSpec>,
    pub grid: Option<GridSpec>,
    pub square: Option<SquareSpec>,
}

pub const DEFAULT_STEP: f64 = 0.05;
pub const DEFAULT_ORDER: usize = 14;

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = read_input(path, "config")?;
        let mut cfg: Self = toml::from_str(&text)
            .map_err(|e| invalid(format!("{}: {}", path.display(), e.message())))?;
        cfg.resolve(path.parent().unwrap_or(Path::new(".")));
        Ok(cfg)
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(p) = p {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        };
        fix(&mut self.spectrogram);
        fix(&mut self.spectrogram_g);
        fix(&mut self.cover);
        fix(&mut self.ground_truth);
        for s in [&mut self.signal, &mut self.signal_g].into_iter().flatten() {
            fix(&mut s.mixture);
            fix(&mut s.sampled);
        }
    }
}

/// Reads an input file; a missing file is a validation error.
pub fn read_input(path: &Path, what: &str) -> Result<String, CliError> {
    if !path.is_file() {
        return Err(invalid(format!(
            "{what} file {} does not exist",
            path.display()
        )));
    }
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parsed<T>(path: &Path, r: gabor_phase::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| invalid(format!("{}: {e}", path.display())))
}

pub fn load_mixture(path: &Path) -> Result<GaussianMixtureSignal, CliError> {
    let text = read_input(path, "mixture")?;
    parsed(path, gabor_phase::io::parse_mixture_toml(&text))
}

pub fn load_signal(spec: &SignalSpec, key: &str) -> Result<Signal, CliError> {
    match (&spec.mixture, &spec.sampled) {
        (Some(p), None) => Ok(load_mixture(p)?.into()),
        (None, Some(p)) => {
            let text = read_input(p, "sampled signal")?;
            Ok(parsed(p, gabor_phase::io::read_sampled_csv(text.as_bytes()))?.into())
        }
        _ => Err(invalid(format!(
            "[{key}] needs exactly one of `mixture` or `sampled`"
        ))),
    }
}

pub fn load_cover(path: &Path) -> Result<SquareCover, CliError> {
    let text = read_input(path, "cover")?;
    parsed(path, gabor_phase::io::read_cover_csv(text.as_bytes()))
}

pub fn load_field(path: &Path) -> Result<gabor_phase::engine::SpectrogramField, CliError> {
    let text = read_input(path, "field")?;
    parsed(path, gabor_phase::io::read_field_csv(text.as_bytes()))
}

pub fn check_step(step: f64) -> Result<f64, CliError> {
    if step > 0.0 && step.is_finite() {
        Ok(step)
    } else {
        Err(invalid(format!("grid step must be positive, got {step}")))
    }
}

impl GridSpec {
    pub fn build(&self, step_override: Option<f64>) -> Result<Grid2D, CliError> {
        let step = check_step(step_override.or(self.step).unwrap_or(DEFAULT_STEP))?;
        let [x0, x1] = self.x;
        let [y0, y1] = self.y;
        if !(x0 < x1 && y0 < y1) || ![x0, x1, y0, y1].iter().all(|v| v.is_finite()) {
            return Err(invalid("[grid] ranges must be finite with min < max"));
        }
        let grid = Grid2D::spanning(x0, x1, y0, y1, step).map_err(|e| invalid(e.to_string()))?;
        if grid.len() > 25_000_000 {
            return Err(invalid(format!(
                "grid has {} points, limit is 25000000",
                grid.len()
            )));
        }
        Ok(grid)
    }
}

impl SquareSpec {
    pub fn build(&self) -> Result<Square, CliError> {
        Square::new((self.center[0], self.center[1]), self.side, self.rotation)
            .map_err(|e| invalid(format!("[square]: {e}")))
    }
}

pub fn require<'a, T>(v: &'a Option<T>, key: &str, command: &str) -> Result<&'a T, CliError> {
    v.as_ref()
        .ok_or_else(|| invalid(format!("`{key}` is required for {command}")))
}

/// Nonempty list with every entry inside `ok`.
pub fn check_list(
    v: &[f64],
    key: &str,
    range: &str,
    ok: impl Fn(f64) -> bool,
) -> Result<(), CliError> {
    if v.is_empty() {
        return Err(invalid(format!("`{key}` must not be empty")));
    }
    if let Some(bad) = v.iter().find(|&&x| !ok(x)) {
        return Err(invalid(format!("`{key}` entry {bad} is outside {range}")));
    }
    Ok(())
}
