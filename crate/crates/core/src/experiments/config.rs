//! Declarative experiment configs. A config is a JSON document:
//!
//! ```json
//! { "schema_version": 1, "name": "demo", "seed": 7,
//!   "experiment": { "kind": "simulate", ... } }
//! ```
//!
//! Unknown keys anywhere are errors, reported with their field path.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::edgelist::EdgeListOptions;
use crate::graph::{ErrorSpec, LatentPositions, ModelSpec, SbmSpec};
use crate::inference::{Alternative, DimensionMode, Model, ShuffleGrid, ShuffleScheme, TwoTierSettings};
use crate::matching::{MatchScope, SgmOptions};
use crate::stats::Statistic;

pub const SCHEMA_VERSION: u32 = 1;

/// A base model as written in configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    Sbm {
        lambda: Vec<Vec<f64>>,
        sizes: Vec<usize>,
        #[serde(default = "unit")]
        nu: f64,
    },
    /// Explicit latent positions, one row per vertex.
    Rdpg {
        x: Vec<Vec<f64>>,
        #[serde(default = "unit")]
        nu: f64,
    },
}

fn unit() -> f64 {
    1.0
}

impl ModelConfig {
    pub fn to_spec(&self) -> Result<ModelSpec> {
        match self {
            ModelConfig::Sbm { lambda, sizes, nu } => Ok(ModelSpec::Sbm(SbmSpec::new(lambda.clone(), sizes.clone(), *nu)?)),
            ModelConfig::Rdpg { x, nu } => {
                let d = x.first().map_or(0, Vec::len);
                if d == 0 || x.iter().any(|r| r.len() != d) {
                    return Err(Error::InvalidSpec("latent rows must be nonempty and of equal length".into()));
                }
                let m = DMatrix::from_fn(x.len(), d, |i, j| x[i][j]);
                Ok(ModelSpec::Rdpg(LatentPositions::new(m, *nu)?))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlternativeConfig {
    /// Reported in the `effect` column.
    pub effect: f64,
    pub error: ErrorSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub null: ModelConfig,
    pub alternatives: Vec<AlternativeConfig>,
    pub statistics: Vec<Statistic>,
    pub grid: ShuffleGrid,
    pub alpha: f64,
    pub n_mc: usize,
    pub dimension: DimensionMode,
    pub shuffle: ShuffleScheme,
}

/// Where the three bootstrap graphs come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSource {
    /// `A_1, A_2` from `null`, `A_3` from `null` perturbed by `error`.
    Sampled { null: ModelConfig, error: Option<ErrorSpec> },
    /// Three edge lists aligned onto their common vertices; paths are relative
    /// to the config file.
    Files {
        a1: PathBuf,
        a2: PathBuf,
        a3: PathBuf,
        #[serde(default)]
        options: EdgeListOptions,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BootstrapConfig {
    pub source: GraphSource,
    pub statistic: Statistic,
    pub grid: ShuffleGrid,
    pub alpha: f64,
    pub replicates: usize,
    pub dimension: DimensionMode,
    pub shuffle: ShuffleScheme,
    /// Seed of the fixed relabeling sequence; derived from the master seed
    /// when absent.
    #[serde(default)]
    pub permutation_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchConfig {
    pub null: ModelConfig,
    pub alternatives: Vec<AlternativeConfig>,
    pub statistic: Statistic,
    pub grid: ShuffleGrid,
    pub alpha: f64,
    pub n_mc: usize,
    pub dimension: DimensionMode,
    pub shuffle: ShuffleScheme,
    #[serde(default)]
    pub sgm: SgmOptions,
    #[serde(default)]
    pub scope: MatchScope,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    Simulate(SimulateConfig),
    Bootstrap(BootstrapConfig),
    TwoTier(TwoTierSettings),
    Match(MatchConfig),
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Simulate(_) => "simulate",
            Experiment::Bootstrap(_) => "bootstrap",
            Experiment::TwoTier(_) => "two-tier",
            Experiment::Match(_) => "match",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub name: String,
    pub seed: u64,
    pub experiment: Experiment,
    /// Directory that relative paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Envelope {
    schema_version: u32,
    name: String,
    seed: u64,
    experiment: serde_json::Value,
}

fn config_error(path: impl Into<String>, message: impl std::fmt::Display) -> Error {
    Error::Config { path: path.into(), message: message.to_string() }
}

fn parse_at<T: DeserializeOwned>(value: serde_json::Value, prefix: &str) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.path().to_string();
        let path = if inner == "." { prefix.to_owned() } else { format!("{prefix}.{inner}") };
        config_error(path, e.into_inner())
    })
}

impl ExperimentConfig {
    /// Parses and validates a config. Nothing is computed.
    pub fn from_json(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut de = serde_json::Deserializer::from_str(text);
        let env: Envelope = serde_path_to_error::deserialize(&mut de)
            .map_err(|e| config_error(e.path().to_string(), e.into_inner()))?;
        if env.schema_version != SCHEMA_VERSION {
            return Err(config_error(
                "schema_version",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", env.schema_version),
            ));
        }
        if env.name.is_empty() || !env.name.chars().all(|c| c.is_ascii_alphanumeric() || "_-.".contains(c)) {
            return Err(config_error("name", "must be nonempty and use only letters, digits, '_', '-', '.'"));
        }
        let mut body = env.experiment;
        let kind = match body.as_object_mut().map(|o| o.remove("kind")) {
            Some(Some(serde_json::Value::String(k))) => k,
            Some(_) => return Err(config_error("experiment.kind", "missing or not a string")),
            None => return Err(config_error("experiment", "expected an object")),
        };
        let experiment = match kind.as_str() {
            "simulate" => Experiment::Simulate(parse_at(body, "experiment")?),
            "bootstrap" => Experiment::Bootstrap(parse_at(body, "experiment")?),
            "two-tier" => Experiment::TwoTier(parse_at(body, "experiment")?),
            "match" => Experiment::Match(parse_at(body, "experiment")?),
            other => {
                return Err(config_error(
                    "experiment.kind",
                    format!("unknown kind `{other}`; expected simulate, bootstrap, two-tier or match"),
                ))
            }
        };
        let cfg = ExperimentConfig {
            schema_version: env.schema_version,
            name: env.name,
            seed: env.seed,
            experiment,
            base_dir: base_dir.into(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json(&text, base)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Semantic checks that need no sampling: levels, counts, models and
    /// budget feasibility.
    pub fn validate(&self) -> Result<()> {
        let at = |field: &str| format!("experiment.{field}");
        let wrap = |field: &str| {
            let path = at(field);
            move |e: Error| match e {
                Error::Config { .. } => e,
                other => config_error(path, other),
            }
        };
        let level = |alpha: f64| {
            if alpha > 0.0 && alpha < 1.0 {
                Ok(())
            } else {
                Err(config_error(at("alpha"), format!("{alpha} is not in (0, 1)")))
            }
        };
        let positive = |field: &str, v: usize| {
            if v > 0 {
                Ok(())
            } else {
                Err(config_error(at(field), "must be positive"))
            }
        };
        match &self.experiment {
            Experiment::Simulate(c) => {
                level(c.alpha)?;
                positive("n_mc", c.n_mc)?;
                if c.statistics.is_empty() {
                    return Err(config_error(at("statistics"), "must list at least one statistic"));
                }
                let null = Model::new(c.null.to_spec().map_err(wrap("null"))?, None).map_err(wrap("null"))?;
                alternatives(&c.null, &c.alternatives)?;
                c.shuffle.check(null.n(), &c.grid.all_budgets()).map_err(wrap("shuffle"))?;
            }
            Experiment::Bootstrap(c) => {
                level(c.alpha)?;
                positive("replicates", c.replicates)?;
                if let GraphSource::Sampled { null, error } = &c.source {
                    let spec = null.to_spec().map_err(wrap("source.null"))?;
                    Model::new(spec.clone(), error.clone()).map_err(wrap("source.error"))?;
                    c.shuffle.check(spec.n(), &c.grid.all_budgets()).map_err(wrap("shuffle"))?;
                }
                if let GraphSource::Files { a1, a2, a3, .. } = &c.source {
                    for (field, p) in [("a1", a1), ("a2", a2), ("a3", a3)] {
                        if !self.resolve(p).is_file() {
                            return Err(config_error(at(&format!("source.{field}")), format!("no such file {}", p.display())));
                        }
                    }
                }
            }
            Experiment::TwoTier(c) => c.validate().map_err(wrap("two-tier"))?,
            Experiment::Match(c) => {
                level(c.alpha)?;
                positive("n_mc", c.n_mc)?;
                let null = Model::new(c.null.to_spec().map_err(wrap("null"))?, None).map_err(wrap("null"))?;
                alternatives(&c.null, &c.alternatives)?;
                c.shuffle.check(null.n(), &c.grid.all_budgets()).map_err(wrap("shuffle"))?;
            }
        }
        Ok(())
    }
}

/// Builds the alternative models; errors name the offending entry.
pub fn alternatives(null: &ModelConfig, alts: &[AlternativeConfig]) -> Result<Vec<Alternative>> {
    if alts.is_empty() {
        return Err(config_error("experiment.alternatives", "must list at least one alternative"));
    }
    alts.iter()
        .enumerate()
        .map(|(i, a)| {
            let path = format!("experiment.alternatives[{i}]");
            let spec = null.to_spec().map_err(|e| config_error(&path, e))?;
            let model = Model::new(spec, Some(a.error.clone())).map_err(|e| config_error(&path, e))?;
            Ok(Alternative { effect: a.effect, model })
        })
        .collect()
}
