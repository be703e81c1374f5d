use rayon::prelude::*;

use super::{CandidatePool, Method, Objective, OptimizationResult, OptimizerError};
use crate::domain::{CampaignSet, ConsumerProfile, RuleSet};
use crate::oracle::RevenueOracle;

/// Repeatedly adds the rule-compatible candidate with the largest positive
/// marginal revenue, stopping when no candidate improves the menu or the menu
/// holds `k` pairs.
pub fn greedy_search(
    candidates: &CandidatePool,
    population: &[ConsumerProfile],
    oracle: &dyn RevenueOracle,
    rules: &RuleSet,
    k: Option<usize>,
) -> Result<OptimizationResult, OptimizerError> {
    let objective = Objective::new(oracle, population);
    let mut current = CampaignSet::empty();
    let mut value = objective.value(&current)?;
    let mut remaining = candidates.pairs();

    while k.is_none_or(|k| current.len() < k) {
        let tentative: Vec<(usize, CampaignSet)> = remaining
            .iter()
            .enumerate()
            .filter_map(|(i, pair)| current.with(*pair).ok().filter(|s| s.satisfies(rules)).map(|s| (i, s)))
            .collect();
        let values = tentative
            .par_iter()
            .map(|(_, s)| objective.value(s))
            .collect::<Result<Vec<_>, _>>()?;

        let best = tentative
            .iter()
            .zip(&values)
            .map(|((i, _), v)| (*i, v.signed_diff(value), *v))
            .filter(|(_, gain, _)| *gain > 0)
            .min_by(|a, b| {
                let (pa, pb) = (&remaining[a.0], &remaining[b.0]);
                b.1.cmp(&a.1).then(pa.threshold().cmp(&pb.threshold())).then(pa.discount().cmp(&pb.discount()))
            });
        let Some((index, _, new_value)) = best else { break };
        let pair = remaining.remove(index);
        current = current.with(pair)?;
        value = new_value;
    }

    Ok(OptimizationResult {
        method: Method::Greedy,
        campaigns: current,
        revenue: value,
        seed: None,
        oracle: objective.oracle_name(),
        evaluations: objective.calls(),
        config_hash: None,
        wall_time_ms: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Money, ThresholdDiscountPair};
    use crate::oracle::{ChoiceModelParams, SimulatorOracle, TabularOracle};

    fn p(t: u64, d: u64) -> ThresholdDiscountPair {
        ThresholdDiscountPair::dollars(t, d)
    }

    fn one_consumer() -> Vec<ConsumerProfile> {
        vec![ConsumerProfile::with_spend("a", Money::from_dollars(100), Money::ZERO)]
    }

    #[test]
    fn modular_oracle_picks_positive_pairs() {
        let pairs = [(p(30, 1), 300), (p(40, 2), -100), (p(50, 3), 500), (p(60, 4), 50)];
        let oracle = TabularOracle::new(pairs);
        let pool = CandidatePool::from_pairs(pairs.iter().map(|x| x.0));
        let all = greedy_search(&pool, &one_consumer(), &oracle, &RuleSet::default(), None).unwrap();
        assert_eq!(all.campaigns, CampaignSet::new(vec![p(30, 1), p(50, 3), p(60, 4)]).unwrap());
        assert_eq!(all.revenue, Money::from_cents(10_000 + 850));

        let top2 = greedy_search(&pool, &one_consumer(), &oracle, &RuleSet::default(), Some(2)).unwrap();
        assert_eq!(top2.campaigns, CampaignSet::new(vec![p(30, 1), p(50, 3)]).unwrap());
    }

    #[test]
    fn refuses_cannibalizing_pair() {
        let oracle = SimulatorOracle::new(ChoiceModelParams { noise_scale: 0.0, ..Default::default() }).unwrap();
        let pop = vec![
            ConsumerProfile::with_spend("a", Money::from_dollars(30), Money::from_dollars(10)),
            ConsumerProfile::with_spend("b", Money::from_dollars(30), Money::from_dollars(10)),
        ];
        let pool = CandidatePool::from_pairs([p(39, 3), p(29, 1)]);
        let res = greedy_search(&pool, &pop, &oracle, &RuleSet::default(), None).unwrap();
        assert_eq!(res.campaigns, CampaignSet::single(p(39, 3)));
        assert_eq!(res.revenue, Money::from_dollars(72));
    }

    #[test]
    fn empty_candidates_give_base_revenue() {
        let oracle = TabularOracle::default();
        let res = greedy_search(&CandidatePool::default(), &one_consumer(), &oracle, &RuleSet::default(), None).unwrap();
        assert!(res.campaigns.is_empty());
        assert_eq!(res.revenue, Money::from_dollars(100));
    }

    #[test]
    fn skips_rule_breaking_additions() {
        // <52,5> alone is best but conflicts with <50,4> on the $5 gap.
        let pairs = [(p(50, 4), 500), (p(52, 5), 400), (p(60, 6), 100)];
        let oracle = TabularOracle::new(pairs);
        let pool = CandidatePool::from_pairs(pairs.iter().map(|x| x.0));
        let res = greedy_search(&pool, &one_consumer(), &oracle, &RuleSet::default(), None).unwrap();
        assert_eq!(res.campaigns, CampaignSet::new(vec![p(50, 4), p(60, 6)]).unwrap());
    }
}
