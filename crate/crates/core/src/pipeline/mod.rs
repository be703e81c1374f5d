//! End-to-end orchestration: population sourcing, the candidate → score →
//! filter → recommend chain with persisted artifacts, and the benchmark.

mod artifacts;
mod benchmark;
mod config;
mod population;
mod run;

pub use artifacts::{artifact_path, read_artifact, write_artifact, Artifact};
pub use config::{ExperimentConfig, OptimizerSettings, OracleKind, OracleSpec, PopulationSource, DEFAULT_GEO_RADIUS_M};
pub use run::{
    method_stage, run_pipeline, OptimizeOutput, PipelineOutput, Timings, Workspace, STAGE_CANDIDATES, STAGE_FILTERED,
    STAGE_POPULATION, STAGE_RECOMMENDATIONS, STAGE_SCORED,
};

pub use benchmark::{
    benchmark_shop, build_shop_instance, render_table, run_benchmark, BenchmarkReport, BenchmarkSpec, MethodRow,
    ShopInstance, ShopOutcome,
};
pub use population::{ingest_population, read_population, synthesize_population, write_population, IngestReport, SynthesisSpec};

use thiserror::Error;

use crate::optimizer::OptimizerError;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("stage {stage}: {source}")]
    Stage { stage: &'static str, source: OptimizerError },
    #[error("io error: {0}")]
    Io(String),
}

impl PipelineError {
    pub fn stage(stage: &'static str, source: OptimizerError) -> Self {
        PipelineError::Stage { stage, source }
    }

    /// Process exit code: 2 config, 3 data, 4 size refusal.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::Stage { source, .. } if source.is_refusal() => 4,
            PipelineError::Stage { source: OptimizerError::InvalidArgument(_), .. } => 2,
            PipelineError::Data(_) | PipelineError::Stage { .. } | PipelineError::Io(_) => 3,
        }
    }
}
