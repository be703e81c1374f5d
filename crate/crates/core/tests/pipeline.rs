mod common;

use std::path::Path;

use common::fixture;
use dmc_core::domain::{satisfies_rules, CampaignSet, ConsumerProfile, Gender, Money, ThresholdDiscountPair};
use dmc_core::optimizer::{CandidatePool, Method, OptimizationResult};
use dmc_core::oracle::{simulator_evaluate, ChoiceModelParams};
use dmc_core::pipeline::{
    ingest_population, read_artifact, run_pipeline, synthesize_population, ExperimentConfig, OracleSpec,
    PopulationSource, SynthesisSpec, Workspace, DEFAULT_GEO_RADIUS_M, STAGE_FILTERED, STAGE_POPULATION, STAGE_SCORED,
};
use serde::Deserialize;

fn tiny() -> ExperimentConfig {
    ExperimentConfig::load(&fixture("tiny.toml")).unwrap()
}

fn sim_params(config: &ExperimentConfig) -> ChoiceModelParams {
    match &config.oracle {
        OracleSpec::Sim(p) => p.clone(),
        other => panic!("expected simulator oracle, got {other:?}"),
    }
}

#[derive(Deserialize)]
struct GoldenResult {
    method: Method,
    campaigns: CampaignSet,
    revenue_cents: u64,
}

#[test]
fn tiny_config_end_to_end_golden() {
    let config = tiny();
    let dir = tempfile::tempdir().unwrap();
    let out = run_pipeline(&config, dir.path()).unwrap();
    let hash = &out.config_hash;
    let params = sim_params(&config);

    // Stage checks against direct recomputation.
    let population: Vec<ConsumerProfile> = read_artifact(dir.path(), STAGE_POPULATION, hash).unwrap();
    assert_eq!(population.len(), 60);
    let base = simulator_evaluate(&CampaignSet::empty(), &population, &params);
    let scored: CandidatePool = read_artifact(dir.path(), STAGE_SCORED, hash).unwrap();
    for entry in scored.entries.iter().step_by(97) {
        let single = simulator_evaluate(&CampaignSet::single(entry.pair), &population, &params);
        assert_eq!(entry.revenue_cents, single.signed_diff(base), "{}", entry.pair);
    }
    let filtered: CandidatePool = read_artifact(dir.path(), STAGE_FILTERED, hash).unwrap();
    assert!(satisfies_rules(&filtered.pairs(), &config.rules));
    assert!(filtered.entries.windows(2).all(|w| w[0].revenue_cents >= w[1].revenue_cents));
    for r in &out.results {
        assert_eq!(r.revenue, simulator_evaluate(&r.campaigns, &population, &params));
        assert!(r.campaigns.iter().all(|p| filtered.entries.iter().any(|e| e.pair == *p)));
        assert_eq!(r.config_hash.as_deref(), Some(hash.as_str()));
    }

    let golden: Vec<GoldenResult> =
        serde_json::from_str(&std::fs::read_to_string(fixture("tiny.golden.json")).unwrap()).unwrap();
    assert_eq!(out.results.len(), golden.len());
    for (r, g) in out.results.iter().zip(&golden) {
        assert_eq!(r.method, g.method);
        assert_eq!(r.campaigns, g.campaigns);
        assert_eq!(r.revenue.cents(), g.revenue_cents);
    }
    assert!(out.results.windows(2).all(|w| w[0].revenue >= w[1].revenue));
    assert!(dir.path().join("timings.json").exists());
}

#[test]
fn single_candidate_single_consumer() {
    let mut config = tiny();
    config.rules.min_threshold = Money::from_dollars(30);
    config.rules.max_threshold = Money::from_dollars(30);
    config.rules.discount_step = Money::from_dollars(30);
    config.population = PopulationSource::Synth(SynthesisSpec { count: 1, ..SynthesisSpec::default() });
    config.optimizer.k = 1;
    let dir = tempfile::tempdir().unwrap();
    let out = run_pipeline(&config, dir.path()).unwrap();
    assert_eq!(out.results.len(), 1);
    let pair = ThresholdDiscountPair::dollars(30, 30);
    let menu = &out.results[0].campaigns;
    assert!(menu.is_empty() || *menu == CampaignSet::single(pair));
}

#[test]
fn k_three_results_are_ranked() {
    let mut config = tiny();
    config.optimizer.trials = 12;
    let dir = tempfile::tempdir().unwrap();
    let out = run_pipeline(&config, dir.path()).unwrap();
    assert!(out.results.len() <= 3 && !out.results.is_empty());
    assert!(out.results.windows(2).all(|w| w[0].revenue >= w[1].revenue));
}

#[test]
fn stepwise_workspace_matches_run() {
    let config = tiny();
    let full = tempfile::tempdir().unwrap();
    run_pipeline(&config, full.path()).unwrap();
    let steps = tempfile::tempdir().unwrap();
    let ws = Workspace::new(config, steps.path());
    ws.install(|| {
        ws.synth_population()?;
        ws.candidates()?;
        ws.score()?;
        ws.filter()?;
        ws.recommend()
    })
    .unwrap();
    for stage in ["population", "candidates", "scored", "filtered", "recommendations"] {
        let a = std::fs::read(full.path().join(format!("{stage}.json"))).unwrap();
        let b = std::fs::read(steps.path().join(format!("{stage}.json"))).unwrap();
        assert_eq!(a, b, "{stage}");
    }
}

#[test]
fn optimize_methods_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = tiny();
    config.optimizer.max_candidates = Some(8);
    let ws = Workspace::new(config, dir.path());
    ws.install(|| {
        ws.synth_population()?;
        ws.candidates()?;
        ws.score()?;
        ws.filter()
    })
    .unwrap();
    let exhaustive = ws.optimize(Method::Exhaustive, None).unwrap().result;
    let greedy = ws.optimize(Method::Greedy, None).unwrap().result;
    let usm = ws.optimize(Method::RandomizedUsm, None).unwrap();
    assert!(exhaustive.revenue >= greedy.revenue);
    assert!(exhaustive.revenue >= usm.result.revenue);
    assert!(usm.result.wall_time_ms.is_some());
    let filtered: CandidatePool = read_artifact(dir.path(), STAGE_FILTERED, &ws.hash).unwrap();
    usm.trace.as_ref().unwrap().check_invariants(&filtered.pairs()).unwrap();
    let log = std::fs::read_to_string(dir.path().join("usm_trace.log")).unwrap();
    assert_eq!(log.lines().count(), 8 + 3);
    let capped = ws.optimize(Method::RandomizedUsm, Some(1)).unwrap().result;
    assert!(capped.campaigns.len() <= 1);
}

#[test]
fn mixed_config_artifacts_refused() {
    let dir = tempfile::tempdir().unwrap();
    let config = tiny();
    run_pipeline(&config, dir.path()).unwrap();
    let mut other = config.clone();
    other.seed += 1;
    let ws = Workspace::new(other, dir.path());
    let err = ws.filter().unwrap_err();
    assert_eq!(err.exit_code(), 3);
    assert!(err.to_string().contains("refusing to mix"));
}

#[test]
fn ingest_fixture_golden() {
    let report = ingest_population(&fixture("population_sample.jsonl"), DEFAULT_GEO_RADIUS_M).unwrap();
    assert_eq!(report.outside_radius, 1);
    assert!(report.warnings.is_empty());
    let golden = vec![
        ConsumerProfile {
            consumer_id: "p-001".into(),
            base_spend: Money::from_cents(3250),
            stretch: Money::from_cents(500),
            age_bucket: 3,
            gender: Gender::Female,
            shop_category: 1,
            gmv_30d: Money::from_cents(9750),
            gmv_60d: Money::from_cents(16250),
            gmv_90d: Money::from_cents(29250),
            distance_to_shop_m: 420.5,
        },
        ConsumerProfile {
            consumer_id: "p-002".into(),
            base_spend: Money::from_cents(5100),
            stretch: Money::ZERO,
            age_bucket: 6,
            gender: Gender::Male,
            shop_category: 1,
            gmv_30d: Money::ZERO,
            gmv_60d: Money::from_cents(5100),
            gmv_90d: Money::from_cents(10200),
            distance_to_shop_m: 3000.0,
        },
        ConsumerProfile {
            consumer_id: "p-004".into(),
            base_spend: Money::from_cents(4420),
            stretch: Money::from_cents(310),
            age_bucket: 7,
            gender: Gender::Female,
            shop_category: 0,
            gmv_30d: Money::from_cents(13260),
            gmv_60d: Money::from_cents(22100),
            gmv_90d: Money::from_cents(35360),
            distance_to_shop_m: 10.0,
        },
    ];
    assert_eq!(report.consumers, golden);
}

#[test]
fn malformed_row_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.jsonl");
    let good = std::fs::read_to_string(fixture("cannibalization.jsonl")).unwrap();
    let first = good.lines().next().unwrap();
    std::fs::write(&path, format!("{first}\n{{\"consumer_id\": 3}}\n")).unwrap();
    let err = ingest_population(&path, DEFAULT_GEO_RADIUS_M).unwrap_err();
    assert_eq!(err.exit_code(), 3);
    assert!(err.to_string().contains("line 2"), "{err}");
}

#[test]
fn synthesized_mean_spend_within_one_percent() {
    let spec = SynthesisSpec { count: 10_000, ..SynthesisSpec::default() };
    let pop = synthesize_population(&spec, 2024).unwrap();
    let mean = pop.iter().map(|c| c.base_spend.cents() as f64).sum::<f64>() / pop.len() as f64;
    let target = spec.mean_spend.cents() as f64;
    assert!((mean - target).abs() / target < 0.01, "mean {mean} vs {target}");
    assert_eq!(pop, synthesize_population(&spec, 2024).unwrap());
}

#[test]
fn stretch_reaches_typical_thresholds_for_a_minority() {
    // Instances should be neither all-trigger nor none-trigger.
    let spec = SynthesisSpec { count: 10_000, ..SynthesisSpec::default() };
    let pop = synthesize_population(&spec, 3).unwrap();
    let typical = Money::from_cents(spec.mean_spend.cents() * 6 / 5);
    let reach = pop.iter().filter(|c| c.base_spend < typical && c.max_spend() >= typical).count() as f64 / pop.len() as f64;
    assert!((0.1..0.45).contains(&reach), "share able to stretch to a typical threshold: {reach}");
}

#[test]
fn tabular_and_file_population_config() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("lifts.jsonl");
    std::fs::write(
        &table,
        "{\"threshold_cents\":3000,\"discount_cents\":100,\"lift_cents\":250}\n{\"threshold_cents\":4000,\"discount_cents\":300,\"lift_cents\":-50}\n",
    )
    .unwrap();
    std::fs::copy(fixture("population_sample.jsonl"), dir.path().join("pop.jsonl")).unwrap();
    let text = r#"
[rules]
min_threshold_cents = 3000
max_threshold_cents = 4000
threshold_step_cents = 1000
discount_step_cents = 100

[oracle]
kind = "tabular"
table = "lifts.jsonl"

[population]
kind = "file"
path = "pop.jsonl"

[optimizer]
trials = 4
k = 1
"#;
    let config = ExperimentConfig::from_toml_str(text, dir.path()).unwrap();
    let out_dir = dir.path().join("out");
    let out = run_pipeline(&config, &out_dir).unwrap();
    let best: &OptimizationResult = &out.results[0];
    // Zero-lift pairs may ride along (ties add); the negative one may not.
    assert!(best.campaigns.contains(&ThresholdDiscountPair::dollars(30, 1)));
    assert!(!best.campaigns.contains(&ThresholdDiscountPair::dollars(40, 3)));
    // Three consumers, each lifted by $2.50.
    assert_eq!(best.revenue, Money::from_cents(3250 + 5100 + 4420 + 3 * 250));
}

#[test]
fn neural_config_runs() {
    let dir = tempfile::tempdir().unwrap();
    let weights = common::fixture_weights();
    std::fs::write(dir.path().join("w.json"), weights.to_json()).unwrap();
    let text = r#"
seed = 4
[rules]
min_threshold_cents = 2500
max_threshold_cents = 4500
threshold_step_cents = 500
discount_step_cents = 100

[oracle]
kind = "neural"
weights = "w.json"
as_of = "2020-04-24"
shop = { shop_id = "shop-1", city_id = "city-1", category = 2 }

[population]
kind = "synth"
count = 5

[optimizer]
trials = 3
k = 2
"#;
    let config = ExperimentConfig::from_toml_str(text, dir.path()).unwrap();
    let out = run_pipeline(&config, &dir.path().join("out")).unwrap();
    assert!(!out.results.is_empty());
}

#[test]
fn missing_weights_is_data_error() {
    let text = r#"
[oracle]
kind = "neural"
weights = "nowhere.json"
as_of = "2020-04-24"
shop = { shop_id = "s", city_id = "c", category = 0 }

[population]
kind = "synth"
count = 5
"#;
    let config = ExperimentConfig::from_toml_str(text, Path::new("/nonexistent")).unwrap();
    let err = run_pipeline(&config, tempfile::tempdir().unwrap().path()).unwrap_err();
    assert_eq!(err.exit_code(), 3);
}
