use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Objective, OptimizerError};
use crate::domain::{CampaignSet, Money, ThresholdDiscountPair};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Greedy,
    RandomizedUsm,
    Exhaustive,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Greedy => "Greedy Searching",
            Method::RandomizedUsm => "Randomized USM Searching",
            Method::Exhaustive => "Global Optimum Searching",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub method: Method,
    pub campaigns: CampaignSet,
    #[serde(rename = "revenue_cents")]
    pub revenue: Money,
    pub seed: Option<u64>,
    pub oracle: String,
    /// Oracle evaluations spent.
    pub evaluations: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

/// Total order used to rank results: revenue descending, then fewer pairs,
/// then lexicographically smaller pair list.
pub fn rank_order(a: &(Money, &CampaignSet), b: &(Money, &CampaignSet)) -> Ordering {
    b.0.cmp(&a.0)
        .then(a.1.len().cmp(&b.1.len()))
        .then_with(|| a.1.sort_key().cmp(&b.1.sort_key()))
}

/// Keeps the first `k` pairs of `result` in candidate-sequence order and
/// re-evaluates the revenue.
pub fn truncate_to_k(
    result: OptimizationResult,
    k: usize,
    sequence: &[ThresholdDiscountPair],
    objective: &Objective<'_>,
) -> Result<OptimizationResult, OptimizerError> {
    if result.campaigns.len() <= k {
        return Ok(result);
    }
    let kept: Vec<_> = sequence.iter().filter(|p| result.campaigns.contains(p)).take(k).copied().collect();
    let campaigns = CampaignSet::new(kept)?;
    let revenue = objective.value(&campaigns)?;
    Ok(OptimizationResult { campaigns, revenue, evaluations: result.evaluations + 1, ..result })
}
