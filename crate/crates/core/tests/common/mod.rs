#![allow(dead_code)]

use std::path::PathBuf;

use chrono::NaiveDate;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use dmc_core::domain::{CampaignSet, ConsumerProfile, ThresholdDiscountPair};
use dmc_core::encoding::{FeatureBundle, FeatureLayout, ShopContext};
use dmc_core::oracle::ScorerWeights;

/// Parameters the committed conformance goldens were produced with.
pub const WEIGHTS_SEED: u64 = 424;
pub const WEIGHTS_HIDDEN: usize = 32;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

#[derive(Deserialize)]
pub struct Case {
    pub consumer: ConsumerProfile,
    pub shop: ShopContext,
    pub target: ThresholdDiscountPair,
    pub menu: CampaignSet,
    pub as_of: NaiveDate,
    pub bundle: FeatureBundle,
}

#[derive(Deserialize)]
pub struct GoldenScore {
    pub logit: f64,
    pub score: f64,
}

#[derive(Deserialize)]
pub struct EvaluateCase {
    pub population: Vec<ConsumerProfile>,
    pub shop: ShopContext,
    pub menu: CampaignSet,
    pub as_of: NaiveDate,
}

#[derive(Deserialize)]
pub struct EvaluateGolden {
    pub revenue_cents: u64,
    pub revenue_cents_exact: f64,
}

fn read_json<T: serde::de::DeserializeOwned>(name: &str) -> T {
    let text = std::fs::read_to_string(fixture(name)).unwrap();
    serde_json::from_str(&text).unwrap()
}

pub fn cases() -> Vec<Case> {
    read_json("conformance/cases.json")
}

pub fn golden_scores() -> Vec<GoldenScore> {
    read_json("conformance/scores.json")
}

pub fn evaluate_case() -> (EvaluateCase, EvaluateGolden) {
    (read_json("conformance/evaluate_case.json"), read_json("conformance/evaluate_golden.json"))
}

/// Rebuilds the fixture weights and checks them against the committed digest,
/// so goldens and weights cannot drift apart silently.
pub fn fixture_weights() -> ScorerWeights {
    let weights = ScorerWeights::initialized(WEIGHTS_SEED, WEIGHTS_HIDDEN, FeatureLayout::default());
    let digest = hex::encode(Sha256::digest(weights.to_json().as_bytes()));
    let expected = std::fs::read_to_string(fixture("conformance/weights.sha256")).unwrap();
    assert_eq!(digest, expected.trim(), "fixture weights no longer match the committed digest");
    weights
}
