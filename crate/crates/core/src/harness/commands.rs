//! Command implementations. Each writes its primary output to a file or the
//! supplied writer and returns an error whose [`exit_code`](Error::exit_code)
//! the binary uses.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::format::{csv_string, fmt_f64, linspace, write_atomic};
use super::io::{dataset_from_samples, read_config, read_dataset, read_model, write_model, ConfigLayer, Sample};
use super::verify::{run_verify, VerifyOptions};
use crate::closed_form::{closed_form_h, ClosedFormParams};
use crate::critical::{log_spaced_decreasing, run_trichotomy_sweep};
use crate::error::{Error, Result};
use crate::spectral::{Dataset, FrequencyGrid};
use crate::subcritical::{build_construction, construction_sobolev_norm, evaluate_construction, run_decay_sweep};
use crate::tikhonov::{fit_timed, FittedModel};

/// Largest imaginary part tolerated in a reconstruction.
pub const IMAG_RESIDUE_TOL: f64 = 1e-8;

fn io_out(e: std::io::Error) -> Error {
    Error::Io(e)
}

/// Fits `dataset` under the config file merged with `overrides`, writes
/// the model JSON to `output` and prints a one-line summary.
pub fn cmd_fit(
    config: Option<&Path>,
    overrides: &ConfigLayer,
    dataset: &Path,
    output: &Path,
    out: &mut dyn Write,
) -> Result<FittedModel> {
    let layer = match config {
        Some(p) => read_config(p)?,
        None => ConfigLayer::default(),
    }
    .merged(overrides);
    let solve = layer.solve_config()?;
    let (m, delta_xi) = layer.grid_params()?;
    let data = read_dataset(dataset)?;
    let grid = FrequencyGrid::new(data.dim(), m, delta_xi)?;
    let (model, seconds) = fit_timed(&grid, &data, &solve)?;
    write_model(output, &model)?;
    writeln!(
        out,
        "objective={} max_residual={} backend={} G={} wall_time_s={:.3}",
        fmt_f64(model.objective),
        fmt_f64(model.max_residual()),
        solve.backend,
        grid.len(),
        seconds
    )
    .map_err(io_out)?;
    Ok(model)
}

/// Evaluation grid: `points` samples per axis on `[lo, hi]^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl EvalGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi) {
            return Err(Error::parse("eval", format!("need finite lo <= hi, got [{}, {}]", self.lo, self.hi)));
        }
        if self.points == 0 {
            return Err(Error::parse("eval", "points must be positive"));
        }
        Ok(())
    }

    /// Tensor grid in row-major order, first coordinate slowest.
    pub fn nodes(&self, d: usize) -> Vec<Vec<f64>> {
        let axis = linspace(self.lo, self.hi, self.points);
        let mut out: Vec<Vec<f64>> = vec![Vec::new()];
        for _ in 0..d {
            out = out
                .into_iter()
                .flat_map(|p| {
                    axis.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        out
    }
}

fn coordinate_header(d: usize, value: &str) -> Vec<String> {
    let mut h: Vec<String> = if d == 1 {
        vec!["x".into()]
    } else {
        (1..=d).map(|k| format!("x{k}")).collect()
    };
    h.push(value.into());
    h
}

fn header_refs(h: &[String]) -> Vec<&str> {
    h.iter().map(String::as_str).collect()
}

/// Reconstruction CSV and the largest |Im h| seen.
pub fn reconstruction_csv(model: &FittedModel, grid: &EvalGrid) -> Result<(String, f64)> {
    grid.validate()?;
    let d = model.grid().dim();
    let mut residue: f64 = 0.0;
    let rows = grid
        .nodes(d)
        .into_iter()
        .map(|x| {
            let h = model.evaluate(&x)?;
            residue = residue.max(h.im.abs());
            Ok(x.into_iter().chain([h.re]).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok((csv_string(&header_refs(&coordinate_header(d, "h")), &rows)?, residue))
}

/// Evaluates a saved model; fails with a numeric error when the
/// reconstruction is not real to [`IMAG_RESIDUE_TOL`].
pub fn cmd_eval(model: &Path, grid: &EvalGrid, output: Option<&Path>, out: &mut dyn Write, err: &mut dyn Write) -> Result<f64> {
    let model = read_model(model)?;
    let (csv, residue) = reconstruction_csv(&model, grid)?;
    writeln!(err, "imaginary residue: {}", fmt_f64(residue)).map_err(io_out)?;
    if residue > IMAG_RESIDUE_TOL {
        return Err(Error::Numeric(format!(
            "imaginary residue {residue:e} exceeds {IMAG_RESIDUE_TOL:e}; the model is not hermitian"
        )));
    }
    emit(output, &csv, out)?;
    Ok(residue)
}

fn emit(output: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<()> {
    match output {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => out.write_all(text.as_bytes()).map_err(io_out),
    }
}

/// Closed-form one-point reconstruction as `x,h` CSV.
pub fn closed_form_csv(params: &ClosedFormParams, grid: &EvalGrid) -> Result<String> {
    grid.validate()?;
    let rows: Vec<Vec<f64>> = linspace(grid.lo, grid.hi, grid.points)
        .into_iter()
        .map(|x| vec![x, closed_form_h(params, x)])
        .collect();
    csv_string(&["x", "h"], &rows)
}

pub fn cmd_closed_form(params: &ClosedFormParams, grid: &EvalGrid, output: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    emit(output, &closed_form_csv(params, grid)?, out)
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalVerdict {
    pub d: usize,
    pub alpha: f64,
    pub fitted_slope: f64,
    pub expected_slope: f64,
    pub slope_consistent: bool,
    pub terminal_norm: f64,
    pub critical_constant: f64,
    pub classification: crate::critical::LimitBehavior,
}

/// σ sweep of the Gaussian Sobolev norm: `sigma,norm` CSV plus a verdict JSON.
pub fn cmd_critical(
    d: usize,
    alpha: f64,
    sigmas: &[f64],
    output: Option<&Path>,
    verdict: Option<&Path>,
    out: &mut dyn Write,
) -> Result<CriticalVerdict> {
    let sweep = run_trichotomy_sweep(d, alpha, sigmas)?;
    let rows: Vec<Vec<f64>> = sweep.sigmas.iter().zip(&sweep.norms).map(|(s, n)| vec![*s, *n]).collect();
    emit(output, &csv_string(&["sigma", "norm"], &rows)?, out)?;
    let v = CriticalVerdict {
        d,
        alpha,
        fitted_slope: sweep.fitted_slope,
        expected_slope: sweep.expected_slope,
        slope_consistent: sweep.slope_consistent,
        terminal_norm: sweep.terminal_norm,
        critical_constant: sweep.critical_constant,
        classification: sweep.classification,
    };
    let json = to_json(&v)?;
    match verdict {
        Some(p) => write_atomic(p, json.as_bytes())?,
        None if output.is_some() => out.write_all(json.as_bytes()).map_err(io_out)?,
        None => {}
    }
    Ok(v)
}

/// Construction norms along `sigmas`: `sigma,norm,dominance_margin` CSV.
pub fn cmd_subcritical(data: &Dataset, alpha: f64, sigmas: &[f64], output: Option<&Path>, out: &mut dyn Write) -> Result<f64> {
    let sweep = run_decay_sweep(data, alpha, sigmas)?;
    let rows: Vec<Vec<f64>> = sweep
        .points
        .iter()
        .map(|p| vec![p.sigma, p.norm, p.dominance_margin])
        .collect();
    emit(output, &csv_string(&["sigma", "norm", "dominance_margin"], &rows)?, out)?;
    Ok(sweep.fitted_slope)
}

/// Prints one line per check; returns whether all passed.
pub fn cmd_verify(opts: &VerifyOptions, out: &mut dyn Write) -> Result<bool> {
    let outcomes = run_verify(opts);
    for o in &outcomes {
        writeln!(out, "{o}").map_err(io_out)?;
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    writeln!(out, "{} of {} checks passed", outcomes.len() - failed, outcomes.len()).map_err(io_out)?;
    Ok(failed == 0)
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Numeric(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Alpha,
    #[serde(rename = "M")]
    M,
    Sigma,
    Lambda,
}

impl SweepAxis {
    fn as_str(self) -> &'static str {
        match self {
            SweepAxis::Alpha => "alpha",
            SweepAxis::M => "M",
            SweepAxis::Sigma => "sigma",
            SweepAxis::Lambda => "lambda",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMethod {
    /// General solver fit, then reconstruction on the eval grid.
    Solver,
    /// One-point closed form (d = 1, data ignored).
    ClosedForm,
    /// Gaussian Sobolev norm σ sweep per point.
    Critical,
    /// RBF construction per σ.
    Subcritical,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub method: SweepMethod,
    #[serde(default)]
    pub dataset_path: Option<PathBuf>,
    #[serde(default)]
    pub points: Option<Vec<Sample>>,
    /// M, delta_xi and solver keys, same names as the TOML config.
    #[serde(default)]
    pub config: ConfigLayer,
    pub sweep: SweepSpec,
    #[serde(default)]
    pub eval: Option<EvalGrid>,
    /// Dimension for the critical method.
    #[serde(default)]
    pub d: Option<usize>,
    /// σ values for the critical method when sweeping α.
    #[serde(default)]
    pub sigmas: Option<Vec<f64>>,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return Err(Error::parse("name", "must be nonempty and use only [A-Za-z0-9_-]"));
        }
        if self.sweep.values.is_empty() {
            return Err(Error::parse("sweep.values", "sweep list is empty"));
        }
        if let Some(v) = self.sweep.values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::parse("sweep.values", format!("values must be finite and positive, got {v}")));
        }
        if self.sweep.axis == SweepAxis::M && self.sweep.values.iter().any(|v| v.fract() != 0.0) {
            return Err(Error::parse("sweep.values", "M values must be integers"));
        }
        let allowed: &[SweepAxis] = match self.method {
            SweepMethod::Solver | SweepMethod::ClosedForm => &[SweepAxis::Alpha, SweepAxis::M, SweepAxis::Lambda],
            SweepMethod::Critical => &[SweepAxis::Alpha, SweepAxis::Sigma],
            SweepMethod::Subcritical => &[SweepAxis::Sigma, SweepAxis::Alpha],
        };
        if !allowed.contains(&self.sweep.axis) {
            return Err(Error::parse(
                "sweep.axis",
                format!("axis {} is not supported by method {:?}", self.sweep.axis.as_str(), self.method),
            ));
        }
        if matches!(self.method, SweepMethod::Solver | SweepMethod::ClosedForm) && self.eval.is_none() {
            return Err(Error::parse("eval", "required for this method"));
        }
        if let Some(e) = &self.eval {
            e.validate()?;
        }
        if self.dataset_path.is_some() && self.points.is_some() {
            return Err(Error::parse("points", "give either dataset_path or points, not both"));
        }
        Ok(())
    }

    fn dataset(&self, base: &Path) -> Result<Option<Dataset>> {
        match (&self.dataset_path, &self.points) {
            (Some(p), _) => Ok(Some(read_dataset(&base.join(p))?)),
            (None, Some(s)) => Ok(Some(dataset_from_samples(s)?)),
            (None, None) => Ok(None),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ManifestEntry {
    pub index: usize,
    pub value: f64,
    pub status: String,
    pub artifact: Option<String>,
    pub error: Option<String>,
    /// Method-specific scalar (objective, h(0), fitted slope or norm).
    pub metric: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub name: String,
    pub method: SweepMethod,
    pub axis: SweepAxis,
    pub metric: &'static str,
    pub succeeded: usize,
    pub failed: usize,
    pub points: Vec<ManifestEntry>,
}

fn need<T>(v: Option<T>, field: &str) -> Result<T> {
    v.ok_or_else(|| Error::parse(field, "required for this sweep"))
}

fn sweep_point(spec: &ExperimentSpec, data: Option<&Dataset>, value: f64) -> Result<(String, f64)> {
    let mut layer = spec.config.clone();
    match spec.sweep.axis {
        SweepAxis::Alpha => layer.alpha = Some(value),
        SweepAxis::Lambda => layer.lambda = Some(value),
        SweepAxis::M => layer.m = Some(value as usize),
        SweepAxis::Sigma => {}
    }
    match spec.method {
        SweepMethod::Solver => {
            let data = need(data, "dataset_path")?;
            let solve = layer.solve_config()?;
            let (m, dxi) = layer.grid_params()?;
            let grid = FrequencyGrid::new(data.dim(), m, dxi)?;
            let model = crate::tikhonov::fit(&grid, data, &solve)?;
            let (csv, residue) = reconstruction_csv(&model, &need(spec.eval, "eval")?)?;
            if residue > IMAG_RESIDUE_TOL {
                return Err(Error::Numeric(format!("imaginary residue {residue:e}")));
            }
            Ok((csv, model.objective))
        }
        SweepMethod::ClosedForm => {
            let (m, dxi) = layer.grid_params()?;
            let alpha = need(layer.alpha, "alpha")?;
            let lambda = need(layer.lambda, "lambda")?;
            let params = ClosedFormParams::new(m, dxi, alpha, lambda)?;
            Ok((closed_form_csv(&params, &need(spec.eval, "eval")?)?, closed_form_h(&params, 0.0)))
        }
        SweepMethod::Critical => {
            let d = need(spec.d, "d")?;
            let (alpha, sigmas) = match spec.sweep.axis {
                SweepAxis::Sigma => (need(layer.alpha, "alpha")?, vec![value]),
                _ => (
                    value,
                    spec.sigmas.clone().unwrap_or_else(|| log_spaced_decreasing(1e-1, 1e-3, 21)),
                ),
            };
            let norms = sigmas
                .iter()
                .map(|&s| crate::critical::gaussian_sobolev_norm(d, alpha, s))
                .collect::<Result<Vec<_>>>()?;
            let rows: Vec<Vec<f64>> = sigmas.iter().zip(&norms).map(|(s, n)| vec![*s, *n]).collect();
            let metric = if sigmas.len() >= 2 {
                crate::critical::log_log_slope(&sigmas, &norms)?
            } else {
                norms[0]
            };
            Ok((csv_string(&["sigma", "norm"], &rows)?, metric))
        }
        SweepMethod::Subcritical => {
            let data = need(data, "dataset_path")?;
            let alpha = match spec.sweep.axis {
                SweepAxis::Alpha => value,
                _ => need(layer.alpha, "alpha")?,
            };
            let sigma = match spec.sweep.axis {
                SweepAxis::Sigma => value,
                _ => need(spec.sigmas.as_ref().and_then(|s| s.first().copied()), "sigmas")?,
            };
            let c = build_construction(data, sigma)?;
            let norm = construction_sobolev_norm(&c, alpha)?;
            let csv = match &spec.eval {
                Some(e) => {
                    let rows = e
                        .nodes(data.dim())
                        .into_iter()
                        .map(|x| Ok(x.iter().copied().chain([evaluate_construction(&c, &x)?]).collect()))
                        .collect::<Result<Vec<Vec<f64>>>>()?;
                    csv_string(&header_refs(&coordinate_header(data.dim(), "h")), &rows)?
                }
                None => csv_string(
                    &["sigma", "norm", "dominance_margin"],
                    &[vec![sigma, norm, c.diag_dominance_margin]],
                )?,
            };
            Ok((csv, norm))
        }
    }
}

fn metric_name(method: SweepMethod, axis: SweepAxis) -> &'static str {
    match (method, axis) {
        (SweepMethod::Solver, _) => "objective",
        (SweepMethod::ClosedForm, _) => "h0",
        (SweepMethod::Critical, SweepAxis::Sigma) => "norm",
        (SweepMethod::Critical, _) => "fitted_slope",
        (SweepMethod::Subcritical, _) => "norm",
    }
}

pub fn read_experiment(path: &Path) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::parse(path.display().to_string(), format!("cannot read file: {e}")))?;
    serde_json::from_str(&text).map_err(|e| Error::parse("experiment", e.to_string()))
}

/// Runs every sweep point in parallel, writing `<name>_<axis>_<index>.csv`,
/// `summary.csv` and `manifest.json` into `out_dir`. `base` resolves a
/// relative `dataset_path`.
pub fn cmd_sweep(spec: &ExperimentSpec, base: &Path, out_dir: &Path, out: &mut dyn Write) -> Result<Manifest> {
    use rayon::prelude::*;

    spec.validate()?;
    let data = spec.dataset(base)?;
    std::fs::create_dir_all(out_dir)?;
    let axis = spec.sweep.axis.as_str();
    let points: Vec<ManifestEntry> = spec
        .sweep
        .values
        .par_iter()
        .enumerate()
        .map(|(index, &value)| {
            let file = format!("{}_{}_{:03}.csv", spec.name, axis, index);
            let result = sweep_point(spec, data.as_ref(), value)
                .and_then(|(csv, metric)| write_atomic(&out_dir.join(&file), csv.as_bytes()).map(|_| metric));
            match result {
                Ok(metric) => ManifestEntry {
                    index,
                    value,
                    status: "ok".into(),
                    artifact: Some(file),
                    error: None,
                    metric: Some(metric),
                },
                Err(e) => ManifestEntry {
                    index,
                    value,
                    status: "failed".into(),
                    artifact: None,
                    error: Some(e.to_string()),
                    metric: None,
                },
            }
        })
        .collect();
    let succeeded = points.iter().filter(|p| p.status == "ok").count();
    let manifest = Manifest {
        name: spec.name.clone(),
        method: spec.method,
        axis: spec.sweep.axis,
        metric: metric_name(spec.method, spec.sweep.axis),
        succeeded,
        failed: points.len() - succeeded,
        points,
    };
    let mut summary = format!("index,{axis},status,{}\n", manifest.metric);
    for p in &manifest.points {
        summary.push_str(&format!(
            "{},{},{},{}\n",
            p.index,
            fmt_f64(p.value),
            p.status,
            p.metric.map(fmt_f64).unwrap_or_default()
        ));
    }
    write_atomic(&out_dir.join("summary.csv"), summary.as_bytes())?;
    write_atomic(&out_dir.join("manifest.json"), to_json(&manifest)?.as_bytes())?;
    writeln!(out, "{}: {} of {} points succeeded", spec.name, succeeded, manifest.points.len()).map_err(io_out)?;
    if succeeded == 0 {
        return Err(Error::solver("no sweep point succeeded", None));
    }
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tensor_eval_grid_order() {
        let g = EvalGrid {
            lo: 0.0,
            hi: 1.0,
            points: 2,
        };
        assert_eq!(g.nodes(2), vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]]);
        assert_eq!(g.nodes(1).len(), 2);
    }

    #[test]
    fn zero_model_evaluates_to_zero() {
        let grid = FrequencyGrid::new(1, 4, 0.3).unwrap();
        let data = Dataset::from_1d(&[0.0], &[0.0]).unwrap();
        let model = crate::tikhonov::fit(&grid, &data, &crate::SolveConfig::new(2.0, 1.0, crate::Backend::Dual)).unwrap();
        let (csv, residue) = reconstruction_csv(&model, &EvalGrid { lo: -1.0, hi: 1.0, points: 5 }).unwrap();
        assert_eq!(residue, 0.0);
        for line in csv.lines().skip(1) {
            assert_eq!(line.split(',').nth(1).unwrap(), "0.0");
        }
    }

    fn spec(json: &str) -> ExperimentSpec {
        serde_json::from_str(json).unwrap()
    }

    #[test]
    fn empty_sweep_is_a_parse_error() {
        let s = spec(r#"{"name":"e","method":"closed_form","config":{"M":10,"delta_xi":0.1,"lambda":1},
            "sweep":{"axis":"alpha","values":[]},"eval":{"lo":0,"hi":1,"points":3}}"#);
        let e = s.validate().unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("sweep"));
    }

    #[test]
    fn axis_method_compatibility() {
        let s = spec(r#"{"name":"e","method":"closed_form","config":{"M":10,"delta_xi":0.1,"lambda":1},
            "sweep":{"axis":"sigma","values":[0.1]},"eval":{"lo":0,"hi":1,"points":3}}"#);
        assert!(s.validate().is_err());
    }

    #[test]
    fn manifest_records_failures() {
        let dir = tempfile::tempdir().unwrap();
        let s = spec(r#"{"name":"mix","method":"solver","points":[{"x":[0.0],"y":2.0}],
            "config":{"alpha":2,"M":4,"delta_xi":0.5,"lambda":1,"memory_budget_bytes":1000},
            "sweep":{"axis":"M","values":[2,400]},"eval":{"lo":-0.5,"hi":0.5,"points":5}}"#);
        let mut sink = Vec::new();
        let m = cmd_sweep(&s, dir.path(), dir.path(), &mut sink).unwrap();
        assert_eq!((m.succeeded, m.failed), (1, 1));
        assert!(m.points[1].error.as_ref().unwrap().contains("capacity"));
        assert!(dir.path().join("mix_M_000.csv").exists());
        assert!(!dir.path().join("mix_M_001.csv").exists());
    }
}
