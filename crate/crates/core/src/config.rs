//! JSON documents describing models and experiments.
//!
//! Both documents carry `"schema": 1` and reject unknown fields. Component
//! tensors are given inline as `{"data": [...]}` in storage order (first index
//! fastest), as `{"file": "a.tns"}` in the tensor text format, or generated
//! from a seed. Relative paths resolve against the document's directory.
//!
//! ```json
//! {
//!   "schema": 1,
//!   "model": {
//!     "order": 4, "dim": 2,
//!     "law": {"kind": "rademacher"},
//!     "generate": {"count": 50, "seed": 1, "symmetry": "e_symmetric"}
//!   },
//!   "theorem": "even",
//!   "trials": 10000,
//!   "seed": 42,
//!   "t_grid": {"auto": 20}
//! }
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{BernsteinReport, Law, SumModel, Theorem};
use crate::error::{Error, Result};
use crate::montecarlo::{ExperimentConfig, DEFAULT_SLACK};
use crate::random::{e_symmetric_tensor, fully_symmetric_tensor, gaussian_tensor};
use crate::tensor::Tensor;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    /// `(G + G^T)/2`; needs even order.
    ESymmetric,
    /// Invariant under every index permutation.
    Full,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateSpec {
    pub count: usize,
    pub seed: u64,
    pub symmetry: Symmetry,
    #[serde(default = "one")]
    pub scale: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComponentSpec {
    Data { data: Vec<f64> },
    File { file: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    /// Required for standalone documents, optional when nested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<u32>,
    pub order: usize,
    pub dim: usize,
    pub law: Law,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub components: Vec<ComponentSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generate: Option<GenerateSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    List(Vec<f64>),
    Range {
        start: f64,
        stop: f64,
        points: usize,
    },
    /// `points` values spanning `[domain_min, 3 (sqrt(ν) + L)]`.
    Auto {
        auto: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub schema: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_file: Option<PathBuf>,
    /// Defaults to `even` when that theorem applies to the model, else `general`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theorem: Option<Theorem>,
    pub trials: usize,
    pub seed: u64,
    pub t_grid: GridSpec,
    #[serde(default = "default_slack")]
    pub confidence_slack: f64,
}

fn default_slack() -> f64 {
    DEFAULT_SLACK
}

fn check_schema(found: Option<u32>) -> Result<()> {
    match found {
        Some(SCHEMA_VERSION) => Ok(()),
        Some(v) => Err(Error::Config(format!("unsupported schema version {v}"))),
        None => Err(Error::Config("missing \"schema\" field".into())),
    }
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

impl ModelSpec {
    pub fn build(&self, base: &Path) -> Result<SumModel> {
        if self.order == 0 || self.dim == 0 {
            return Err(Error::Config("order and dim must be positive".into()));
        }
        let len = self
            .dim
            .checked_pow(self.order as u32)
            .ok_or_else(|| Error::Config("tensor size overflows".into()))?;
        let mut comps = Vec::new();
        for (k, c) in self.components.iter().enumerate() {
            let t = match c {
                ComponentSpec::Data { data } => {
                    if data.len() != len {
                        return Err(Error::Config(format!(
                            "component {} has {} entries, expected {len}",
                            k + 1,
                            data.len()
                        )));
                    }
                    Tensor::cubic(self.order, self.dim, data.clone())?
                }
                ComponentSpec::File { file } => {
                    let t = Tensor::from_text(&read(&base.join(file))?)?;
                    if t.order() != self.order || t.dim() != Some(self.dim) {
                        return Err(Error::Config(format!(
                            "{} has shape {:?}, expected order {} and dim {}",
                            file.display(),
                            t.shape(),
                            self.order,
                            self.dim
                        )));
                    }
                    t
                }
            };
            comps.push(t);
        }
        if let Some(g) = &self.generate {
            let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
            for _ in 0..g.count {
                let t = match g.symmetry {
                    Symmetry::ESymmetric => {
                        if !self.order.is_multiple_of(2) {
                            return Err(Error::Config(
                                "e_symmetric generation needs even order".into(),
                            ));
                        }
                        e_symmetric_tensor(self.order / 2, self.dim, &mut rng)?
                    }
                    Symmetry::Full => fully_symmetric_tensor(self.order, self.dim, &mut rng)?,
                    Symmetry::None => gaussian_tensor(self.order, self.dim, &mut rng)?,
                };
                comps.push(t.scale(g.scale));
            }
        }
        if comps.is_empty() {
            return Err(Error::Config("model has no components".into()));
        }
        SumModel::new(comps, self.law)
    }
}

/// Reads a model document, or the model embedded in an experiment document.
pub fn load_model(path: &Path) -> Result<SumModel> {
    let text = read(path)?;
    let value: serde_json::Value = parse_json(&text)?;
    let is_experiment = value.get("model").is_some() || value.get("model_file").is_some();
    if is_experiment {
        let spec: ExperimentSpec = parse_json(&text)?;
        spec.model(&base_dir(path))
    } else {
        let spec: ModelSpec = parse_json(&text)?;
        check_schema(spec.schema)?;
        spec.build(&base_dir(path))
    }
}

impl ExperimentSpec {
    pub fn model(&self, base: &Path) -> Result<SumModel> {
        check_schema(Some(self.schema))?;
        match (&self.model, &self.model_file) {
            (Some(m), None) => {
                if m.schema.is_some() {
                    check_schema(m.schema)?;
                }
                m.build(base)
            }
            (None, Some(file)) => load_model(&base.join(file)),
            _ => Err(Error::Config(
                "give exactly one of \"model\" and \"model_file\"".into(),
            )),
        }
    }

    pub fn build(&self, base: &Path) -> Result<ExperimentConfig> {
        let model = self.model(base)?;
        let theorem = match self.theorem {
            Some(t) => t,
            None if model.check_even().is_ok() => Theorem::Even,
            None => Theorem::General,
        };
        let grid = match &self.t_grid {
            GridSpec::List(v) => v.clone(),
            GridSpec::Range {
                start,
                stop,
                points,
            } => linspace(*start, *stop, *points)?,
            GridSpec::Auto { auto } => {
                let report = BernsteinReport::for_model(&model, theorem)?;
                auto_grid(&report, *auto)?
            }
        };
        ExperimentConfig::new(model, theorem, self.trials, grid, self.seed)?
            .with_slack(self.confidence_slack)
    }
}

pub fn parse_experiment(text: &str, base: &Path) -> Result<ExperimentConfig> {
    let spec: ExperimentSpec = parse_json(text)?;
    spec.build(base)
}

pub fn load_experiment(path: &Path) -> Result<ExperimentConfig> {
    parse_experiment(&read(path)?, &base_dir(path))
}

/// `points` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, points: usize) -> Result<Vec<f64>> {
    if !(start.is_finite() && stop.is_finite()) || points == 0 {
        return Err(Error::Config(
            "grid needs finite ends and at least one point".into(),
        ));
    }
    if points == 1 {
        return Ok(vec![start]);
    }
    if stop <= start {
        return Err(Error::Config(format!(
            "grid end {stop} must exceed start {start}"
        )));
    }
    let step = (stop - start) / (points - 1) as f64;
    Ok((0..points)
        .map(|i| {
            if i + 1 == points {
                stop
            } else {
                start + step * i as f64
            }
        })
        .collect())
}

/// Parses `a:b:n` into `linspace(a, b, n)`.
pub fn parse_grid_arg(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || {
        Error::Config(format!(
            "t-grid must look like start:stop:points, got {s:?}"
        ))
    };
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    linspace(a, b, n)
}

/// Grid over `[tail_domain_min, 3 (sqrt(ν) + L)]`, widened to unit length
/// when that interval is empty.
pub fn auto_grid(report: &BernsteinReport, points: usize) -> Result<Vec<f64>> {
    let start = report.tail_domain_min;
    let mut stop = 3.0 * report.scale();
    if stop <= start {
        stop = start + 1.0;
    }
    linspace(start, stop, points)
}
