use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use dmc_core::optimizer::{check_submodularity, CandidatePool, Method, OptimizationResult};
use dmc_core::oracle::ChoiceModelParams;
use dmc_core::pipeline::{
    render_table, run_benchmark, run_pipeline, write_artifact, ExperimentConfig, OracleKind, OracleSpec, PipelineError,
    PopulationSource, SynthesisSpec, Workspace, STAGE_FILTERED,
};

#[derive(Parser)]
#[command(name = "dmcopt", version, about = "Plan threshold-discount campaign menus against a revenue oracle")]
struct Cli {
    /// Experiment config (TOML). Without it a synthetic simulator setup is used.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Artifact directory; defaults to the config's output_dir, then ./out.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    oracle: Option<OracleArg>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleArg {
    Sim,
    Neural,
    Tabular,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Greedy,
    Usm,
    Exhaustive,
}

#[derive(Subcommand)]
enum Command {
    /// Build or ingest the consumer population.
    SynthPop,
    /// Enumerate the candidate grid.
    Candidates,
    /// Score every candidate by its marginal revenue.
    Score,
    /// Keep the rule-compatible candidate sequence.
    Filter,
    /// Run one search method over the filtered sequence.
    Optimize {
        #[arg(long, value_enum, default_value = "usm")]
        method: MethodArg,
        /// Cap on the number of pairs in the menu.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Top-k menus from repeated double greedy runs (k and trials come from the config).
    Recommend,
    /// All stages from population to recommendations.
    Run,
    /// Compare the three search methods on synthetic shops.
    Benchmark {
        #[arg(long)]
        shops: Option<usize>,
        #[arg(long)]
        usm_seeds: Option<usize>,
    },
    /// Brute-force submodularity check on the filtered sequence (at most 12).
    CheckSubmodularity,
}

fn default_config() -> ExperimentConfig {
    ExperimentConfig {
        seed: 0,
        workers: 1,
        output_dir: None,
        rules: Default::default(),
        oracle: OracleSpec::Sim(ChoiceModelParams::default()),
        population: PopulationSource::Synth(SynthesisSpec::default()),
        optimizer: Default::default(),
        benchmark: Default::default(),
        base_dir: PathBuf::from("."),
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, PipelineError> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => default_config(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(kind) = cli.oracle {
        config.select_oracle(match kind {
            OracleArg::Sim => OracleKind::Sim,
            OracleArg::Neural => OracleKind::Neural,
            OracleArg::Tabular => OracleKind::Tabular,
        })?;
    }
    Ok(config)
}

fn result_table(results: &[OptimizationResult]) -> String {
    let rows: Vec<[String; 4]> = results
        .iter()
        .map(|r| {
            let time = r.wall_time_ms.map(|t| format!("{t:.1} ms")).unwrap_or_else(|| "-".into());
            [r.method.to_string(), r.campaigns.to_string(), r.revenue.to_string(), time]
        })
        .collect();
    render_table(&["Search Method", "Campaigns", "GMV", "Time Cost"], &rows)
}

fn pool_summary(label: &str, pool: &CandidatePool, path: &std::path::Path) -> String {
    format!("{label}: {} entries -> {}", pool.len(), path.display())
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    let config = load_config(&cli)?;
    let out = cli.out.clone().or_else(|| config.output_dir.as_ref().map(|p| config.resolve(p))).unwrap_or_else(|| "out".into());
    let ws = Workspace::new(config, &out);
    match cli.command {
        Command::SynthPop => {
            let (pop, path) = ws.install(|| ws.synth_population())?;
            println!("population: {} consumers -> {}", pop.len(), path.display());
        }
        Command::Candidates => {
            let (pool, path) = ws.candidates()?;
            println!("{}", pool_summary("candidates", &pool, &path));
        }
        Command::Score => {
            let (pool, path) = ws.install(|| ws.score())?;
            println!("{}", pool_summary("scored", &pool, &path));
        }
        Command::Filter => {
            let (pool, path) = ws.filter()?;
            println!("{}", pool_summary("filtered", &pool, &path));
            let rows: Vec<[String; 2]> =
                pool.entries.iter().map(|e| [e.pair.to_string(), format!("{:+}", e.revenue_cents)]).collect();
            print!("{}", render_table(&["Pair", "Marginal (cents)"], &rows));
        }
        Command::Optimize { method, k } => {
            let method = match method {
                MethodArg::Greedy => Method::Greedy,
                MethodArg::Usm => Method::RandomizedUsm,
                MethodArg::Exhaustive => Method::Exhaustive,
            };
            let output = ws.install(|| ws.optimize(method, k))?;
            print!("{}", result_table(std::slice::from_ref(&output.result)));
            if let Some(trace) = &output.trace {
                let violations = trace.lemma_violations();
                if violations > 0 {
                    log::warn!("{violations} steps with a + b < 0; the oracle is not submodular on this sequence");
                }
            }
            for path in &output.artifacts {
                println!("wrote {}", path.display());
            }
        }
        Command::Recommend => {
            let (results, path) = ws.install(|| ws.recommend())?;
            print!("{}", result_table(&results));
            println!("wrote {}", path.display());
        }
        Command::Run => {
            let output = run_pipeline(&ws.config, &ws.dir)?;
            print!("{}", result_table(&output.results));
            println!("config {}; artifacts in {}", output.config_hash, ws.dir.display());
        }
        Command::Benchmark { shops, usm_seeds } => {
            let mut spec = ws.config.benchmark.clone();
            spec.shops = shops.unwrap_or(spec.shops);
            spec.usm_seeds = usm_seeds.unwrap_or(spec.usm_seeds);
            let report = run_benchmark(&spec, ws.config.seed)?;
            print!("{}", report.to_table());
            let path = write_artifact(&ws.dir, "benchmark", &ws.hash, &report)?;
            println!("wrote {}", path.display());
        }
        Command::CheckSubmodularity => {
            let report = ws.install(|| {
                let filtered: CandidatePool = dmc_core::pipeline::read_artifact(&ws.dir, STAGE_FILTERED, &ws.hash)?;
                let population = ws.population()?;
                let oracle = ws.config.build_oracle()?;
                check_submodularity(&filtered, &population, oracle.as_ref())
                    .map_err(|e| PipelineError::stage("check-submodularity", e))
            })?;
            let rows = vec![[
                report.candidates.to_string(),
                report.triples.to_string(),
                report.violations.to_string(),
                report.worst_violation_cents.to_string(),
            ]];
            print!("{}", render_table(&["Candidates", "Triples", "Violations", "Worst (cents)"], &rows));
            if let Some(ex) = &report.worst_example {
                println!("worst: A={:?} B={:?} u={}", ex.a.iter().map(|p| p.to_string()).collect::<Vec<_>>(), ex.b.iter().map(|p| p.to_string()).collect::<Vec<_>>(), ex.u);
            }
            let path = write_artifact(&ws.dir, "submodularity", &ws.hash, &report)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
