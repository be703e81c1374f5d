use rayon::prelude::*;

use super::{rank_order, CandidatePool, Method, Objective, OptimizationResult, OptimizerError};
use crate::domain::{satisfies_rules, CampaignSet, ConsumerProfile, Money, RuleSet, ThresholdDiscountPair};
use crate::oracle::RevenueOracle;

/// Default bound on the number of subsets exhaustive search may visit.
pub const DEFAULT_ENUMERATION_LIMIT: u128 = 1 << 24;
const BATCH: usize = 4096;

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Lexicographic k-combinations of `0..n`, in place. Returns false when exhausted.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) else { return false };
    idx[i] += 1;
    for j in i + 1..k {
        idx[j] = idx[j - 1] + 1;
    }
    true
}

/// Enumerates every rule-satisfying subset of the candidates with at most
/// `max_size` pairs and returns the best one.
pub fn exhaustive_search(
    candidates: &CandidatePool,
    population: &[ConsumerProfile],
    oracle: &dyn RevenueOracle,
    rules: &RuleSet,
    max_size: Option<usize>,
    limit: u128,
) -> Result<OptimizationResult, OptimizerError> {
    let pairs = candidates.pairs();
    let n = pairs.len();
    let max_size = max_size.unwrap_or(n).min(n);
    let subsets: u128 = (0..=max_size).map(|k| binomial(n, k)).sum();
    if subsets > limit {
        return Err(OptimizerError::EnumerationTooLarge { subsets, limit });
    }

    let objective = Objective::new(oracle, population);
    let mut best: Option<(Money, CampaignSet)> = None;
    let mut batch: Vec<CampaignSet> = Vec::with_capacity(BATCH);

    let flush = |batch: &mut Vec<CampaignSet>, best: &mut Option<(Money, CampaignSet)>| -> Result<(), OptimizerError> {
        let values = batch.par_iter().map(|s| objective.value(s)).collect::<Result<Vec<_>, _>>()?;
        for (set, value) in batch.drain(..).zip(values) {
            let better = match best {
                None => true,
                Some((bv, bs)) => rank_order(&(value, &set), &(*bv, bs)).is_lt(),
            };
            if better {
                *best = Some((value, set));
            }
        }
        Ok(())
    };

    for k in 0..=max_size {
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            let chosen: Vec<ThresholdDiscountPair> = idx.iter().map(|&i| pairs[i]).collect();
            if satisfies_rules(&chosen, rules) {
                batch.push(CampaignSet::new(chosen)?);
                if batch.len() == BATCH {
                    flush(&mut batch, &mut best)?;
                }
            }
            if !next_combination(&mut idx, n) {
                break;
            }
        }
    }
    flush(&mut batch, &mut best)?;

    let (revenue, campaigns) = best.expect("the empty menu is always enumerated");
    Ok(OptimizationResult {
        method: Method::Exhaustive,
        campaigns,
        revenue,
        seed: None,
        oracle: objective.oracle_name(),
        evaluations: objective.calls(),
        config_hash: None,
        wall_time_ms: None,
    })
}

/// `f` tabulated over every subset of a small ground set, indexed by bitmask
/// (bit `i` set means candidate `i` is on the menu).
#[derive(Clone, Debug)]
pub struct SubsetValues {
    pub pairs: Vec<ThresholdDiscountPair>,
    pub values: Vec<Money>,
}

impl SubsetValues {
    pub fn compute(
        candidates: &CandidatePool,
        population: &[ConsumerProfile],
        oracle: &dyn RevenueOracle,
        max_candidates: usize,
    ) -> Result<Self, OptimizerError> {
        let pairs = candidates.pairs();
        if pairs.len() > max_candidates {
            return Err(OptimizerError::TooManyCandidates { found: pairs.len(), max: max_candidates });
        }
        // Every subset must be a valid menu.
        CampaignSet::new(pairs.clone())?;
        let objective = Objective::new(oracle, population);
        let values = (0..1usize << pairs.len())
            .into_par_iter()
            .map(|mask| objective.value(&Self::menu_of(&pairs, mask)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SubsetValues { pairs, values })
    }

    fn menu_of(pairs: &[ThresholdDiscountPair], mask: usize) -> CampaignSet {
        let chosen = pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, p)| *p).collect();
        CampaignSet::new(chosen).expect("ground set has distinct thresholds")
    }

    pub fn menu(&self, mask: usize) -> CampaignSet {
        Self::menu_of(&self.pairs, mask)
    }

    pub fn value(&self, mask: usize) -> Money {
        self.values[mask]
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Best rule-satisfying subset, with the same tie-breaking as exhaustive search.
    pub fn best(&self, rules: &RuleSet) -> (CampaignSet, Money) {
        let mut best: Option<(Money, CampaignSet)> = None;
        for mask in 0..self.values.len() {
            let set = self.menu(mask);
            if !set.satisfies(rules) {
                continue;
            }
            let value = self.values[mask];
            if best.as_ref().is_none_or(|(bv, bs)| rank_order(&(value, &set), &(*bv, bs)).is_lt()) {
                best = Some((value, set));
            }
        }
        let (value, set) = best.expect("empty menu always satisfies the rules");
        (set, value)
    }
}
