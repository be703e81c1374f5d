use serde::{Deserialize, Serialize};

use super::{Objective, OptimizerError};
use crate::domain::{satisfies_rules, ConsumerProfile, Money, RuleSet, ThresholdDiscountPair};
use crate::oracle::RevenueOracle;

pub const DEFAULT_POOL_CAP: u64 = 50_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateEntry {
    pub pair: ThresholdDiscountPair,
    /// Marginal revenue `f({pair}) - f(∅)`; zero until scored.
    pub revenue_cents: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CandidatePool {
    pub entries: Vec<CandidateEntry>,
    pub sorted_by_revenue: bool,
    /// Zero-discount pairs seen during generation and left out.
    #[serde(default)]
    pub zero_discount_skipped: u64,
}

impl CandidatePool {
    pub fn from_pairs(pairs: impl IntoIterator<Item = ThresholdDiscountPair>) -> Self {
        CandidatePool {
            entries: pairs.into_iter().map(|pair| CandidateEntry { pair, revenue_cents: 0 }).collect(),
            sorted_by_revenue: false,
            zero_discount_skipped: 0,
        }
    }

    pub fn pairs(&self) -> Vec<ThresholdDiscountPair> {
        self.entries.iter().map(|e| e.pair).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// First `n` entries.
    pub fn truncated(&self, n: usize) -> Self {
        CandidatePool { entries: self.entries.iter().take(n).cloned().collect(), ..self.clone() }
    }
}

/// Every (threshold, discount) pair on the rule grid: thresholds from min to
/// max in threshold steps, discounts from one discount step up to the threshold.
pub fn generate_candidates(rules: &RuleSet, cap: u64) -> Result<CandidatePool, OptimizerError> {
    rules.validate()?;
    let (t_step, d_step) = (rules.threshold_step.cents(), rules.discount_step.cents());
    let thresholds: Vec<u64> = (rules.min_threshold.cents()..=rules.max_threshold.cents()).step_by(t_step as usize).collect();
    let size: u64 = thresholds.iter().map(|t| t / d_step).sum();
    if size > cap {
        return Err(OptimizerError::PoolTooLarge { size, cap });
    }
    let mut entries = Vec::with_capacity(size as usize);
    for &t in &thresholds {
        for d in (d_step..=t).step_by(d_step as usize) {
            let pair = ThresholdDiscountPair::new(Money::from_cents(t), Money::from_cents(d))?;
            entries.push(CandidateEntry { pair, revenue_cents: 0 });
        }
    }
    Ok(CandidatePool { entries, sorted_by_revenue: false, zero_discount_skipped: thresholds.len() as u64 })
}

/// Sets each entry's revenue to its marginal value over the empty menu.
pub fn score_candidates(
    pool: &CandidatePool,
    population: &[ConsumerProfile],
    oracle: &dyn RevenueOracle,
) -> Result<CandidatePool, OptimizerError> {
    if pool.is_empty() {
        return Err(OptimizerError::EmptyPool);
    }
    let objective = Objective::new(oracle, population);
    let base = objective.value(&Default::default())?;
    let entries = pool
        .entries
        .iter()
        .map(|e| {
            let value = objective.value(&crate::domain::CampaignSet::single(e.pair))?;
            Ok(CandidateEntry { pair: e.pair, revenue_cents: value.signed_diff(base) })
        })
        .collect::<Result<Vec<_>, OptimizerError>>()?;
    Ok(CandidatePool { entries, sorted_by_revenue: false, zero_discount_skipped: pool.zero_discount_skipped })
}

/// Sorts by revenue and keeps each entry that is compatible with everything
/// accepted before it.
pub fn filter_by_rules(pool: &CandidatePool, rules: &RuleSet) -> CandidatePool {
    let mut sorted = pool.entries.clone();
    sorted.sort_by(|a, b| {
        b.revenue_cents
            .cmp(&a.revenue_cents)
            .then(a.pair.threshold().cmp(&b.pair.threshold()))
            .then(a.pair.discount().cmp(&b.pair.discount()))
    });
    sorted.dedup_by_key(|e| e.pair);
    let mut accepted: Vec<CandidateEntry> = Vec::new();
    let mut pairs: Vec<ThresholdDiscountPair> = Vec::new();
    for entry in sorted {
        pairs.push(entry.pair);
        if satisfies_rules(&pairs, rules) {
            accepted.push(entry);
        } else {
            pairs.pop();
        }
    }
    CandidatePool { entries: accepted, sorted_by_revenue: true, zero_discount_skipped: pool.zero_discount_skipped }
}
