//! Dataset, configuration and model files.
//!
//! Datasets are CSV (header row, `d` coordinate columns, label last) or JSON
//! (`[{"x": [..], "y": ..}, ..]`), chosen by extension. Fit configurations
//! are flat TOML tables whose keys match [`SolveConfig`] plus `M` and
//! `delta_xi`. Models are JSON with coefficients stored as `[re, im]` pairs.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::format::{csv_err, write_atomic};
use crate::error::{Error, Result};
use crate::spectral::{Backend, Dataset, FrequencyGrid, SolveConfig, SpectralCoefficients};
use crate::tikhonov::FittedModel;

pub const MODEL_FORMAT: &str = "fdvar-model/1";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sample {
    pub x: Vec<f64>,
    pub y: f64,
}

pub fn dataset_from_samples(samples: &[Sample]) -> Result<Dataset> {
    Dataset::new(
        samples.iter().map(|s| s.x.clone()).collect(),
        samples.iter().map(|s| s.y).collect(),
    )
}

pub fn dataset_to_samples(data: &Dataset) -> Vec<Sample> {
    data.points()
        .iter()
        .zip(data.labels())
        .map(|(x, &y)| Sample { x: x.clone(), y })
        .collect()
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| {
        Error::parse(path.display().to_string(), format!("cannot read file: {e}"))
    })
}

pub fn parse_dataset_csv(text: &str) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let width = reader.headers().map_err(csv_err)?.len();
    if width < 2 {
        return Err(Error::parse(
            "dataset",
            "CSV needs at least one coordinate column and a label column",
        ));
    }
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::parse(format!("dataset row {}", row + 1), e.to_string()))?;
        let values = record
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| Error::parse(format!("dataset row {}", row + 1), format!("not a number: {s:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        let (y, x) = values.split_last().expect("width checked");
        points.push(x.to_vec());
        labels.push(*y);
    }
    Dataset::new(points, labels)
}

pub fn parse_dataset_json(text: &str) -> Result<Dataset> {
    let samples: Vec<Sample> =
        serde_json::from_str(text).map_err(|e| Error::parse("dataset", e.to_string()))?;
    dataset_from_samples(&samples)
}

/// Reads `.json` as sample records and anything else as CSV.
pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let text = read_text(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => parse_dataset_json(&text),
        _ => parse_dataset_csv(&text),
    }
}

pub fn dataset_csv(data: &Dataset) -> Result<String> {
    let mut header: Vec<String> = (1..=data.dim()).map(|k| format!("x{k}")).collect();
    header.push("y".into());
    let rows: Vec<Vec<f64>> = data
        .points()
        .iter()
        .zip(data.labels())
        .map(|(x, &y)| x.iter().copied().chain([y]).collect())
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    super::format::csv_string(&header, &rows)
}

/// Every key optional, so file values and command-line flags can be merged
/// before validation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub alpha: Option<f64>,
    pub lambda: Option<f64>,
    #[serde(rename = "M")]
    pub m: Option<usize>,
    pub delta_xi: Option<f64>,
    pub backend: Option<Backend>,
    pub solve_tolerance: Option<f64>,
    pub hermitian_projection: Option<bool>,
    pub riemann_normalize: Option<bool>,
    pub exclude_zero_mode: Option<bool>,
    pub memory_budget_bytes: Option<u64>,
}

impl ConfigLayer {
    /// Values in `other` win.
    pub fn merged(&self, other: &ConfigLayer) -> ConfigLayer {
        ConfigLayer {
            alpha: other.alpha.or(self.alpha),
            lambda: other.lambda.or(self.lambda),
            m: other.m.or(self.m),
            delta_xi: other.delta_xi.or(self.delta_xi),
            backend: other.backend.or(self.backend),
            solve_tolerance: other.solve_tolerance.or(self.solve_tolerance),
            hermitian_projection: other.hermitian_projection.or(self.hermitian_projection),
            riemann_normalize: other.riemann_normalize.or(self.riemann_normalize),
            exclude_zero_mode: other.exclude_zero_mode.or(self.exclude_zero_mode),
            memory_budget_bytes: other.memory_budget_bytes.or(self.memory_budget_bytes),
        }
    }

    /// The solve configuration; `alpha`, `lambda` required, backend defaults to dual.
    pub fn solve_config(&self) -> Result<SolveConfig> {
        let alpha = self.alpha.ok_or_else(|| Error::parse("alpha", "missing required key"))?;
        let lambda = self.lambda.ok_or_else(|| Error::parse("lambda", "missing required key"))?;
        let mut c = SolveConfig::new(alpha, lambda, self.backend.unwrap_or(Backend::Dual));
        if let Some(t) = self.solve_tolerance {
            c.solve_tolerance = t;
        }
        if let Some(v) = self.hermitian_projection {
            c.hermitian_projection = v;
        }
        if let Some(v) = self.riemann_normalize {
            c.riemann_normalize = v;
        }
        if let Some(v) = self.exclude_zero_mode {
            c.exclude_zero_mode = v;
        }
        if let Some(v) = self.memory_budget_bytes {
            c.memory_budget_bytes = v;
        }
        c.validate()?;
        Ok(c)
    }

    /// `(M, delta_xi)`, both required.
    pub fn grid_params(&self) -> Result<(usize, f64)> {
        let m = self.m.ok_or_else(|| Error::parse("M", "missing required key"))?;
        let dxi = self.delta_xi.ok_or_else(|| Error::parse("delta_xi", "missing required key"))?;
        if m == 0 {
            return Err(Error::parse("M", "must be positive"));
        }
        if !(dxi.is_finite() && dxi > 0.0) {
            return Err(Error::parse("delta_xi", format!("must be positive, got {dxi}")));
        }
        Ok((m, dxi))
    }
}

fn field_from_message(msg: &str) -> String {
    ["alpha", "lambda", "delta_xi", "backend", "solve_tolerance", "hermitian_projection",
     "riemann_normalize", "exclude_zero_mode", "memory_budget_bytes", "M"]
        .iter()
        .find(|k| msg.contains(&format!("`{k}`")) || msg.contains(&format!("{k} =")))
        .map(|k| k.to_string())
        .unwrap_or_else(|| "config".into())
}

pub fn parse_config_toml(text: &str) -> Result<ConfigLayer> {
    toml::from_str(text).map_err(|e| {
        let msg = e.to_string();
        Error::parse(field_from_message(&msg), msg)
    })
}

pub fn read_config(path: &Path) -> Result<ConfigLayer> {
    parse_config_toml(&read_text(path)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    pub d: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub delta_xi: f64,
}

impl From<&FrequencyGrid> for GridParams {
    fn from(g: &FrequencyGrid) -> Self {
        Self {
            d: g.dim(),
            m: g.band_limit(),
            delta_xi: g.delta_xi(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format: String,
    config: SolveConfig,
    grid: GridParams,
    dataset_hash: String,
    objective: f64,
    residuals: Vec<f64>,
    hermitian: bool,
    coefficients: Vec<[f64; 2]>,
}

pub fn model_to_json(model: &FittedModel) -> Result<String> {
    let file = ModelFile {
        format: MODEL_FORMAT.into(),
        config: model.config,
        grid: model.grid().into(),
        dataset_hash: model.dataset_hash.clone(),
        objective: model.objective,
        residuals: model.residuals.clone(),
        hermitian: model.coefficients.is_hermitian(),
        coefficients: model.coefficients.values().iter().map(|c| [c.re, c.im]).collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).map_err(|e| Error::Numeric(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn model_from_json(text: &str) -> Result<FittedModel> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::parse("model", e.to_string()))?;
    if file.format != MODEL_FORMAT {
        return Err(Error::parse("format", format!("expected {MODEL_FORMAT:?}, got {:?}", file.format)));
    }
    let grid = FrequencyGrid::new(file.grid.d, file.grid.m, file.grid.delta_xi)
        .map_err(|e| Error::parse("grid", e.to_string()))?;
    let values: Vec<Complex64> = file.coefficients.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
    let coefficients = if file.hermitian {
        SpectralCoefficients::new_hermitian(grid, values)
    } else {
        SpectralCoefficients::new(grid, values)
    }
    .map_err(|e| Error::parse("coefficients", e.to_string()))?;
    Ok(FittedModel {
        coefficients,
        config: file.config,
        dataset_hash: file.dataset_hash,
        objective: file.objective,
        residuals: file.residuals,
    })
}

pub fn write_model(path: &Path, model: &FittedModel) -> Result<()> {
    write_atomic(path, model_to_json(model)?.as_bytes())
}

pub fn read_model(path: &Path) -> Result<FittedModel> {
    model_from_json(&read_text(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_dataset() {
        let d = parse_dataset_csv("x1, x2, y\n-0.75,0.5,0.9\n0.25,0.5,0.7\n").unwrap();
        assert_eq!(d.dim(), 2);
        assert_eq!(d.labels(), &[0.9, 0.7]);
        let back = parse_dataset_csv(&dataset_csv(&d).unwrap()).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn empty_csv_dataset() {
        let e = parse_dataset_csv("x,y\n").unwrap_err();
        assert!(e.to_string().contains("dataset empty"));
    }

    #[test]
    fn bad_csv_cell_names_row() {
        let e = parse_dataset_csv("x,y\n0.1,abc\n").unwrap_err();
        assert!(matches!(e, Error::Parse { ref field, .. } if field == "dataset row 1"));
    }

    #[test]
    fn json_dataset() {
        let d = parse_dataset_json(r#"[{"x":[-0.5],"y":0.9},{"x":[0.5],"y":0.9}]"#).unwrap();
        assert_eq!(d.len(), 2);
        assert!(parse_dataset_json("[]").unwrap_err().to_string().contains("dataset empty"));
    }

    #[test]
    fn toml_config() {
        let layer = parse_config_toml("alpha = 4\nlambda = 1.0\nM = 100\ndelta_xi = 0.01\nbackend = \"svd\"\n").unwrap();
        let c = layer.solve_config().unwrap();
        assert_eq!(c.alpha, 4.0);
        assert_eq!(c.backend, Backend::Svd);
        assert_eq!(layer.grid_params().unwrap(), (100, 0.01));
    }

    #[test]
    fn missing_alpha_is_named() {
        let layer = parse_config_toml("lambda = 1.0\nM = 10\ndelta_xi = 0.1\n").unwrap();
        match layer.solve_config().unwrap_err() {
            Error::Parse { field, .. } => assert_eq!(field, "alpha"),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn bad_value_is_named() {
        let e = parse_config_toml("alpha = \"four\"\n").unwrap_err();
        assert!(e.to_string().contains("alpha"), "{e}");
        let e = parse_config_toml("alpah = 1.0\n").unwrap_err();
        assert!(e.to_string().contains("alpah"), "{e}");
    }

    #[test]
    fn flags_override_file() {
        let file = parse_config_toml("alpha = 4\nlambda = 1.0\n").unwrap();
        let flags = ConfigLayer {
            alpha: Some(2.0),
            ..Default::default()
        };
        assert_eq!(file.merged(&flags).solve_config().unwrap().alpha, 2.0);
    }

    #[test]
    fn model_round_trip() {
        let grid = FrequencyGrid::new(1, 3, 0.7).unwrap();
        let data = Dataset::from_1d(&[0.1, -0.3], &[1.0, 0.25]).unwrap();
        let model = crate::tikhonov::fit(&grid, &data, &SolveConfig::new(2.0, 0.1, Backend::Direct)).unwrap();
        let s = model_to_json(&model).unwrap();
        let back = model_from_json(&s).unwrap();
        assert_eq!(back, model);
        assert_eq!(model_to_json(&back).unwrap(), s);
    }

    #[test]
    fn model_format_tag_checked() {
        let grid = FrequencyGrid::new(1, 1, 1.0).unwrap();
        let data = Dataset::from_1d(&[0.0], &[1.0]).unwrap();
        let model = crate::tikhonov::fit(&grid, &data, &SolveConfig::new(2.0, 1.0, Backend::Dual)).unwrap();
        let s = model_to_json(&model).unwrap().replace(MODEL_FORMAT, "other/0");
        assert!(matches!(model_from_json(&s), Err(Error::Parse { .. })));
    }
}
