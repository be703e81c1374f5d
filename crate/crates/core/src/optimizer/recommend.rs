use super::{greedy_search, randomized_usm, rank_order, CandidatePool, OptimizationResult, OptimizerError};
use crate::domain::{ConsumerProfile, RuleSet};
use crate::oracle::rng::derive_seed;
use crate::oracle::RevenueOracle;

/// Runs double greedy `trials` times with derived seeds and returns the `k`
/// best distinct menus. When fewer than `k` distinct menus come out, the
/// greedy menu is added (if it is new) before ranking.
pub fn recommend_top_k(
    candidates: &CandidatePool,
    population: &[ConsumerProfile],
    oracle: &dyn RevenueOracle,
    rules: &RuleSet,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<OptimizationResult>, OptimizerError> {
    if k == 0 || trials < k {
        return Err(OptimizerError::InvalidArgument(format!("need 1 <= k <= trials, got k={k}, trials={trials}")));
    }
    let mut found: Vec<OptimizationResult> = Vec::new();
    for trial in 0..trials {
        let (result, _) = randomized_usm(candidates, population, oracle, derive_seed(seed, trial as u64))?;
        match found.iter_mut().find(|r| r.campaigns == result.campaigns) {
            Some(existing) => existing.evaluations += result.evaluations,
            None => found.push(result),
        }
    }
    if found.len() < k {
        let greedy = greedy_search(candidates, population, oracle, rules, None)?;
        if !found.iter().any(|r| r.campaigns == greedy.campaigns) {
            found.push(greedy);
        }
    }
    found.sort_by(|a, b| rank_order(&(a.revenue, &a.campaigns), &(b.revenue, &b.campaigns)));
    found.truncate(k);
    Ok(found)
}
