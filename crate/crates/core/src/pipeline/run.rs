use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::artifacts::{read_artifact, write_artifact};
use super::{ExperimentConfig, PipelineError};
use crate::domain::ConsumerProfile;
use crate::optimizer::{
    exhaustive_search, filter_by_rules, generate_candidates, greedy_search, randomized_usm, recommend_top_k,
    score_candidates, CandidatePool, Method, OptimizationResult, UsmTrace,
};
use crate::oracle::RevenueOracle;

pub const STAGE_POPULATION: &str = "population";
pub const STAGE_CANDIDATES: &str = "candidates";
pub const STAGE_SCORED: &str = "scored";
pub const STAGE_FILTERED: &str = "filtered";
pub const STAGE_RECOMMENDATIONS: &str = "recommendations";

/// Stage runner bound to one config and one output directory.
pub struct Workspace {
    pub config: ExperimentConfig,
    pub dir: PathBuf,
    pub hash: String,
}

/// Wall-clock per stage. Kept out of the stage artifacts so those stay
/// reproducible byte for byte.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Timings {
    pub stages_ms: BTreeMap<String, f64>,
}

#[derive(Debug)]
pub struct PipelineOutput {
    pub config_hash: String,
    pub results: Vec<OptimizationResult>,
    pub artifacts: Vec<PathBuf>,
    pub timings: Timings,
}

#[derive(Debug)]
pub struct OptimizeOutput {
    pub result: OptimizationResult,
    pub trace: Option<UsmTrace>,
    pub artifacts: Vec<PathBuf>,
}

fn timed<T>(timings: &mut Timings, stage: &str, f: impl FnOnce() -> Result<T, PipelineError>) -> Result<T, PipelineError> {
    let start = Instant::now();
    let out = f()?;
    timings.stages_ms.insert(stage.to_string(), start.elapsed().as_secs_f64() * 1000.0);
    Ok(out)
}

impl Workspace {
    pub fn new(config: ExperimentConfig, dir: &Path) -> Self {
        let hash = config.config_hash();
        Workspace { config, dir: dir.to_path_buf(), hash }
    }

    /// Runs `f` on a pool with the configured worker count.
    pub fn install<T: Send>(&self, f: impl FnOnce() -> Result<T, PipelineError> + Send) -> Result<T, PipelineError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.config.workers)
            .build()
            .map_err(|e| PipelineError::Io(format!("thread pool: {e}")))?;
        pool.install(f)
    }

    fn write<T: Serialize>(&self, stage: &str, data: &T) -> Result<PathBuf, PipelineError> {
        write_artifact(&self.dir, stage, &self.hash, data)
    }

    fn read<T: serde::de::DeserializeOwned>(&self, stage: &str) -> Result<T, PipelineError> {
        read_artifact(&self.dir, stage, &self.hash)
    }

    pub fn synth_population(&self) -> Result<(Vec<ConsumerProfile>, PathBuf), PipelineError> {
        let population = self.config.load_population()?;
        if population.is_empty() {
            return Err(PipelineError::Data("population is empty".into()));
        }
        let path = self.write(STAGE_POPULATION, &population)?;
        Ok((population, path))
    }

    pub fn population(&self) -> Result<Vec<ConsumerProfile>, PipelineError> {
        self.read(STAGE_POPULATION)
    }

    pub fn candidates(&self) -> Result<(CandidatePool, PathBuf), PipelineError> {
        let pool = generate_candidates(&self.config.rules, self.config.optimizer.pool_cap)
            .map_err(|e| PipelineError::stage(STAGE_CANDIDATES, e))?;
        let path = self.write(STAGE_CANDIDATES, &pool)?;
        Ok((pool, path))
    }

    pub fn score_with(
        &self,
        pool: &CandidatePool,
        population: &[ConsumerProfile],
        oracle: &dyn RevenueOracle,
    ) -> Result<(CandidatePool, PathBuf), PipelineError> {
        let scored = score_candidates(pool, population, oracle).map_err(|e| PipelineError::stage(STAGE_SCORED, e))?;
        let path = self.write(STAGE_SCORED, &scored)?;
        Ok((scored, path))
    }

    pub fn score(&self) -> Result<(CandidatePool, PathBuf), PipelineError> {
        let pool: CandidatePool = self.read(STAGE_CANDIDATES)?;
        let population = self.population()?;
        let oracle = self.config.build_oracle()?;
        self.score_with(&pool, &population, oracle.as_ref())
    }

    pub fn filter_pool(&self, scored: &CandidatePool) -> Result<(CandidatePool, PathBuf), PipelineError> {
        let mut filtered = filter_by_rules(scored, &self.config.rules);
        if let Some(n) = self.config.optimizer.max_candidates {
            filtered = filtered.truncated(n);
        }
        let path = self.write(STAGE_FILTERED, &filtered)?;
        Ok((filtered, path))
    }

    pub fn filter(&self) -> Result<(CandidatePool, PathBuf), PipelineError> {
        let scored: CandidatePool = self.read(STAGE_SCORED)?;
        self.filter_pool(&scored)
    }

    pub fn recommend_with(
        &self,
        filtered: &CandidatePool,
        population: &[ConsumerProfile],
        oracle: &dyn RevenueOracle,
    ) -> Result<(Vec<OptimizationResult>, PathBuf), PipelineError> {
        let opt = &self.config.optimizer;
        let mut results = recommend_top_k(
            filtered,
            population,
            oracle,
            &self.config.rules,
            opt.k,
            opt.trials,
            self.config.search_seed(),
        )
        .map_err(|e| PipelineError::stage(STAGE_RECOMMENDATIONS, e))?;
        for r in &mut results {
            r.config_hash = Some(self.hash.clone());
        }
        let path = self.write(STAGE_RECOMMENDATIONS, &results)?;
        Ok((results, path))
    }

    pub fn recommend(&self) -> Result<(Vec<OptimizationResult>, PathBuf), PipelineError> {
        let filtered: CandidatePool = self.read(STAGE_FILTERED)?;
        let population = self.population()?;
        let oracle = self.config.build_oracle()?;
        self.recommend_with(&filtered, &population, oracle.as_ref())
    }

    /// Runs one search method over the filtered sequence. The result carries
    /// its wall time; a double greedy run also writes its trace.
    pub fn optimize(&self, method: Method, k: Option<usize>) -> Result<OptimizeOutput, PipelineError> {
        let filtered: CandidatePool = self.read(STAGE_FILTERED)?;
        let population = self.population()?;
        let oracle = self.config.build_oracle()?;
        let (rules, opt) = (&self.config.rules, &self.config.optimizer);
        let stage = method_stage(method);
        let start = Instant::now();
        let (mut result, trace) = match method {
            Method::Greedy => (greedy_search(&filtered, &population, oracle.as_ref(), rules, k).map_err(|e| PipelineError::stage(stage, e))?, None),
            Method::Exhaustive => (
                exhaustive_search(&filtered, &population, oracle.as_ref(), rules, k, opt.enumeration_limit)
                    .map_err(|e| PipelineError::stage(stage, e))?,
                None,
            ),
            Method::RandomizedUsm => {
                let (r, trace) = randomized_usm(&filtered, &population, oracle.as_ref(), self.config.search_seed())
                    .map_err(|e| PipelineError::stage(stage, e))?;
                let r = match k {
                    Some(k) => {
                        let objective = crate::optimizer::Objective::new(oracle.as_ref(), &population);
                        crate::optimizer::truncate_to_k(r, k, &filtered.pairs(), &objective)
                            .map_err(|e| PipelineError::stage(stage, e))?
                    }
                    None => r,
                };
                (r, Some(trace))
            }
        };
        result.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1000.0);
        result.config_hash = Some(self.hash.clone());
        let mut artifacts = vec![self.write(stage, &result)?];
        if let Some(trace) = &trace {
            artifacts.push(self.write("usm_trace", trace)?);
            let log = self.dir.join("usm_trace.log");
            std::fs::write(&log, trace.to_log()).map_err(|e| PipelineError::Io(format!("{}: {e}", log.display())))?;
            artifacts.push(log);
        }
        Ok(OptimizeOutput { result, trace, artifacts })
    }
}

pub fn method_stage(method: Method) -> &'static str {
    match method {
        Method::Greedy => "optimize-greedy",
        Method::RandomizedUsm => "optimize-usm",
        Method::Exhaustive => "optimize-exhaustive",
    }
}

/// Full chain: population, candidates, scoring, rule filter and top-k
/// recommendation, each persisted under `dir`. Wall-clock goes to
/// `timings.json` only.
pub fn run_pipeline(config: &ExperimentConfig, dir: &Path) -> Result<PipelineOutput, PipelineError> {
    let ws = Workspace::new(config.clone(), dir);
    ws.install(|| {
        let mut timings = Timings::default();
        let mut artifacts = Vec::new();
        let (population, p) = timed(&mut timings, STAGE_POPULATION, || ws.synth_population())?;
        artifacts.push(p);
        let oracle = ws.config.build_oracle()?;
        let (pool, p) = timed(&mut timings, STAGE_CANDIDATES, || ws.candidates())?;
        artifacts.push(p);
        let (scored, p) = timed(&mut timings, STAGE_SCORED, || ws.score_with(&pool, &population, oracle.as_ref()))?;
        artifacts.push(p);
        let (filtered, p) = timed(&mut timings, STAGE_FILTERED, || ws.filter_pool(&scored))?;
        artifacts.push(p);
        let (results, p) =
            timed(&mut timings, STAGE_RECOMMENDATIONS, || ws.recommend_with(&filtered, &population, oracle.as_ref()))?;
        artifacts.push(p);
        let timing_path = dir.join("timings.json");
        let text = serde_json::to_string_pretty(&timings).map_err(|e| PipelineError::Io(e.to_string()))?;
        std::fs::write(&timing_path, text + "\n").map_err(|e| PipelineError::Io(format!("{}: {e}", timing_path.display())))?;
        Ok(PipelineOutput { config_hash: ws.hash.clone(), results, artifacts, timings })
    })
}
