use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{ingest_population, synthesize_population, BenchmarkSpec, PipelineError, SynthesisSpec};
use crate::domain::{ConsumerProfile, RuleSet};
use crate::encoding::ShopContext;
use crate::optimizer::{Method, DEFAULT_ENUMERATION_LIMIT, DEFAULT_POOL_CAP};
use crate::oracle::rng::derive_seed;
use crate::oracle::{ChoiceModelParams, NeuralOracle, RevenueOracle, ScorerWeights, SimulatorOracle, TabularOracle};

pub const DEFAULT_GEO_RADIUS_M: f64 = 3000.0;

/// Which revenue oracle an experiment uses. Exactly one per config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OracleSpec {
    Sim(ChoiceModelParams),
    Neural { weights: PathBuf, shop: ShopContext, as_of: NaiveDate },
    Tabular { table: PathBuf },
}

impl OracleSpec {
    pub fn kind(&self) -> OracleKind {
        match self {
            OracleSpec::Sim(_) => OracleKind::Sim,
            OracleSpec::Neural { .. } => OracleKind::Neural,
            OracleSpec::Tabular { .. } => OracleKind::Tabular,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleKind {
    Sim,
    Neural,
    Tabular,
}

/// Where consumers come from. Exactly one per config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PopulationSource {
    Synth(SynthesisSpec),
    File {
        path: PathBuf,
        #[serde(default = "default_radius")]
        radius_m: f64,
    },
}

fn default_radius() -> f64 {
    DEFAULT_GEO_RADIUS_M
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerSettings {
    /// Method used by the single-method `optimize` step.
    pub method: Method,
    /// Double greedy runs behind a recommendation.
    pub trials: usize,
    /// Number of recommended menus.
    pub k: usize,
    pub pool_cap: u64,
    /// Keep only the first `n` entries of the filtered sequence.
    pub max_candidates: Option<usize>,
    pub enumeration_limit: u128,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        OptimizerSettings {
            method: Method::RandomizedUsm,
            trials: 20,
            k: 3,
            pool_cap: DEFAULT_POOL_CAP,
            max_candidates: None,
            enumeration_limit: DEFAULT_ENUMERATION_LIMIT,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    /// Worker threads for oracle fan-out; results do not depend on it.
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub rules: RuleSet,
    pub oracle: OracleSpec,
    pub population: PopulationSource,
    #[serde(default)]
    pub optimizer: OptimizerSettings,
    #[serde(default)]
    pub benchmark: BenchmarkSpec,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_workers() -> usize {
    1
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self, PipelineError> {
        let mut config: ExperimentConfig = toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        config.base_dir = base_dir.to_path_buf();
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml_str(&text, &base)
            .map_err(|e| PipelineError::Config(format!("{}: {}", path.display(), e.to_string().trim_start_matches("config error: "))))
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let config = |m: String| PipelineError::Config(m);
        self.rules.validate().map_err(|e| config(e.to_string()))?;
        if self.workers == 0 {
            return Err(config("workers must be at least 1".into()));
        }
        let opt = &self.optimizer;
        if opt.k == 0 || opt.trials < opt.k {
            return Err(config(format!("need 1 <= k <= trials, got k={}, trials={}", opt.k, opt.trials)));
        }
        match &self.oracle {
            OracleSpec::Sim(params) => params.validate().map_err(|e| config(e.to_string()))?,
            OracleSpec::Neural { .. } | OracleSpec::Tabular { .. } => {}
        }
        match &self.population {
            PopulationSource::Synth(spec) => spec.validate()?,
            PopulationSource::File { radius_m, .. } => {
                if !(radius_m.is_finite() && *radius_m >= 0.0) {
                    return Err(config("population radius_m must be a non-negative number".into()));
                }
            }
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON form, leaving out settings that must
    /// not change results (worker count and output location).
    pub fn config_hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes");
        if let Some(map) = value.as_object_mut() {
            map.remove("workers");
            map.remove("output_dir");
        }
        hex::encode(Sha256::digest(value.to_string().as_bytes()))
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    /// Switches the oracle kind. Moving to the simulator without a configured
    /// section uses default choice parameters; the other kinds need paths.
    pub fn select_oracle(&mut self, kind: OracleKind) -> Result<(), PipelineError> {
        if self.oracle.kind() == kind {
            return Ok(());
        }
        match kind {
            OracleKind::Sim => {
                self.oracle = OracleSpec::Sim(ChoiceModelParams::default());
                Ok(())
            }
            other => Err(PipelineError::Config(format!(
                "--oracle {} requested but the config has no such oracle section",
                serde_json::to_value(other).expect("kind serializes").as_str().unwrap_or("?")
            ))),
        }
    }

    pub fn build_oracle(&self) -> Result<Box<dyn RevenueOracle>, PipelineError> {
        match &self.oracle {
            OracleSpec::Sim(params) => Ok(Box::new(
                SimulatorOracle::new(params.clone()).map_err(|e| PipelineError::Config(e.to_string()))?,
            )),
            OracleSpec::Neural { weights, shop, as_of } => {
                let weights = ScorerWeights::load(&self.resolve(weights)).map_err(|e| PipelineError::Data(e.to_string()))?;
                Ok(Box::new(
                    NeuralOracle::new(weights, shop.clone(), *as_of).map_err(|e| PipelineError::Data(e.to_string()))?,
                ))
            }
            OracleSpec::Tabular { table } => Ok(Box::new(
                TabularOracle::load(&self.resolve(table)).map_err(|e| PipelineError::Data(e.to_string()))?,
            )),
        }
    }

    pub fn load_population(&self) -> Result<Vec<ConsumerProfile>, PipelineError> {
        match &self.population {
            PopulationSource::Synth(spec) => synthesize_population(spec, derive_seed(self.seed, 0)),
            PopulationSource::File { path, radius_m } => {
                let report = ingest_population(&self.resolve(path), *radius_m)?;
                if report.outside_radius > 0 {
                    log::info!("{} consumers outside {radius_m} m dropped", report.outside_radius);
                }
                Ok(report.consumers)
            }
        }
    }

    /// Seed for the recommendation step's double greedy trials.
    pub fn search_seed(&self) -> u64 {
        derive_seed(self.seed, 1)
    }
}
