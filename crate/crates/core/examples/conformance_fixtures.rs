//! Writes the inputs for the scorer conformance fixtures: fixture weights and
//! 100 scoring cases with their assembled feature bundles. Golden scores are
//! then produced from these files by `tools/forward_reference.py`.
//!
//!     cargo run --example conformance_fixtures -- <out-dir>

use std::path::PathBuf;

use chrono::{Days, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use dmc_core::domain::{CampaignSet, ConsumerProfile, ThresholdDiscountPair};
use dmc_core::encoding::{assemble_features, FeatureBundle, FeatureLayout, ShopContext};
use dmc_core::oracle::ScorerWeights;
use dmc_core::pipeline::{synthesize_population, SynthesisSpec};

pub const WEIGHTS_SEED: u64 = 424;
pub const WEIGHTS_HIDDEN: usize = 32;

#[derive(Serialize)]
struct Case {
    consumer: ConsumerProfile,
    shop: ShopContext,
    target: ThresholdDiscountPair,
    menu: CampaignSet,
    as_of: NaiveDate,
    bundle: FeatureBundle,
}

#[derive(Serialize)]
struct EvaluateCase {
    population: Vec<ConsumerProfile>,
    shop: ShopContext,
    menu: CampaignSet,
    as_of: NaiveDate,
}

fn random_menu(rng: &mut ChaCha8Rng) -> CampaignSet {
    let size = rng.random_range(1..=5);
    let mut pairs = Vec::with_capacity(size);
    let (mut t, mut d) = (rng.random_range(15..40u64), rng.random_range(1..4u64));
    for _ in 0..size {
        pairs.push(ThresholdDiscountPair::dollars(t, d));
        t += rng.random_range(5..20);
        d += rng.random_range(1..4);
    }
    CampaignSet::new(pairs).expect("ladder is valid")
}

fn main() {
    let out = PathBuf::from(std::env::args().nth(1).expect("usage: conformance_fixtures <out-dir>"));
    std::fs::create_dir_all(&out).unwrap();
    let layout = FeatureLayout::default();
    let weights = ScorerWeights::initialized(WEIGHTS_SEED, WEIGHTS_HIDDEN, layout);
    let weights_json = weights.to_json();
    std::fs::write(out.join("weights.json"), &weights_json).unwrap();
    std::fs::write(out.join("weights.sha256"), hex::encode(Sha256::digest(weights_json.as_bytes())) + "\n").unwrap();

    let spec = SynthesisSpec {
        count: 100,
        age_weights: vec![1.0; 8],
        shop_category_weights: vec![1.0; 8],
        ..SynthesisSpec::default()
    };
    let population = synthesize_population(&spec, 99).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let start = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
    let cases: Vec<Case> = population
        .iter()
        .enumerate()
        .map(|(i, consumer)| {
            let shop = ShopContext {
                shop_id: format!("shop-{}", i % 7),
                city_id: format!("city-{}", i % 3),
                category: consumer.shop_category,
            };
            let menu = random_menu(&mut rng);
            let target = menu.pairs()[rng.random_range(0..menu.len())];
            let as_of = start.checked_add_days(Days::new(rng.random_range(0..366))).unwrap();
            let bundle = assemble_features(consumer, &shop, &target, &menu, as_of, &layout).unwrap();
            Case { consumer: consumer.clone(), shop, target, menu, as_of, bundle }
        })
        .collect();
    std::fs::write(out.join("cases.json"), serde_json::to_string_pretty(&cases).unwrap() + "\n").unwrap();

    let evaluate = EvaluateCase {
        population: population[..20].to_vec(),
        shop: ShopContext { shop_id: "shop-3".into(), city_id: "city-1".into(), category: 2 },
        menu: CampaignSet::new(vec![
            ThresholdDiscountPair::dollars(30, 2),
            ThresholdDiscountPair::dollars(40, 4),
            ThresholdDiscountPair::dollars(55, 7),
        ])
        .unwrap(),
        as_of: NaiveDate::from_ymd_opt(2020, 4, 24).unwrap(),
    };
    std::fs::write(out.join("evaluate_case.json"), serde_json::to_string_pretty(&evaluate).unwrap() + "\n").unwrap();
    eprintln!("wrote fixtures to {}", out.display());
}
