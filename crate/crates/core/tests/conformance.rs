mod common;

use common::{cases, evaluate_case, fixture_weights, golden_scores};
use dmc_core::domain::Money;
use dmc_core::encoding::{assemble_features, FeatureLayout};
use dmc_core::oracle::{neural_evaluate, neural_logit, neural_score, ScorerWeights};

#[test]
fn bundles_match_golden() {
    for (i, case) in cases().iter().enumerate() {
        let bundle =
            assemble_features(&case.consumer, &case.shop, &case.target, &case.menu, case.as_of, &FeatureLayout::default())
                .unwrap();
        assert_eq!(bundle, case.bundle, "case {i}");
    }
}

#[test]
fn scores_match_reference_within_1e9() {
    let weights = fixture_weights();
    let golden = golden_scores();
    let cases = cases();
    assert_eq!(cases.len(), 100);
    assert_eq!(golden.len(), 100);
    for (i, (case, g)) in cases.iter().zip(&golden).enumerate() {
        let z = neural_logit(&case.bundle, &weights).unwrap();
        let s = neural_score(&case.bundle, &weights).unwrap();
        assert!((z - g.logit).abs() <= 1e-9, "case {i}: logit {z} vs {}", g.logit);
        assert!((s - g.score).abs() <= 1e-9, "case {i}: score {s} vs {}", g.score);
        assert!(s > 0.0 && s < 1.0);
    }
}

#[test]
fn fixture_covers_empty_and_multi_context() {
    let cases = cases();
    assert!(cases.iter().any(|c| c.bundle.not_target.is_empty()));
    assert!(cases.iter().any(|c| c.bundle.not_target.len() >= 3));
}

#[test]
fn evaluate_matches_reference() {
    let weights = fixture_weights();
    let (case, golden) = evaluate_case();
    let value = neural_evaluate(&case.menu, &case.population, &weights, &case.shop, case.as_of).unwrap();
    assert_eq!(value, Money::from_cents(golden.revenue_cents), "exact reference {}", golden.revenue_cents_exact);
}

#[test]
fn weights_round_trip_through_file() {
    let weights = fixture_weights();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.json");
    std::fs::write(&path, weights.to_json()).unwrap();
    let back = ScorerWeights::load(&path).unwrap();
    assert_eq!(back, weights);
    let case = &cases()[0];
    assert_eq!(neural_score(&case.bundle, &back).unwrap(), neural_score(&case.bundle, &weights).unwrap());
}
