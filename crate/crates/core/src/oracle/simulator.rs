//! Ground-truth consumer choice simulator.
//!
//! Each consumer either buys their intended basket (triggering whatever pair
//! that basket already meets) or stretches the basket up to one threshold
//! within reach. The option with the highest utility
//! `rate_saved * discount - rate_effort * extra_spend + noise` wins; ties go to
//! the smaller spend. Noise is keyed on (seed, consumer, pair), so a consumer's
//! taste for a given pair does not change when the rest of the menu changes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rng::keyed_normal;
use super::{OracleError, RevenueOracle};
use crate::domain::{CampaignSet, ConsumerProfile, Money, ThresholdDiscountPair};
use crate::encoding::fnv1a_64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChoiceModelParams {
    /// Utility per currency unit saved.
    pub stretch_utility_rate: f64,
    /// Disutility per currency unit of extra spend.
    pub effort_cost_rate: f64,
    pub noise_scale: f64,
    pub seed: u64,
}

impl Default for ChoiceModelParams {
    fn default() -> Self {
        ChoiceModelParams { stretch_utility_rate: 1.0, effort_cost_rate: 0.25, noise_scale: 0.5, seed: 0 }
    }
}

impl ChoiceModelParams {
    pub fn validate(&self) -> Result<(), OracleError> {
        let ok = |x: f64| x.is_finite() && x >= 0.0;
        if ok(self.stretch_utility_rate) && ok(self.effort_cost_rate) && ok(self.noise_scale) {
            Ok(())
        } else {
            Err(OracleError::InvalidParams("choice model rates must be finite and non-negative".into()))
        }
    }
}

/// Outcome of one consumer's visit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Choice {
    pub spend: Money,
    pub discount: Money,
    pub pair: Option<ThresholdDiscountPair>,
}

impl Choice {
    pub fn net(&self) -> Money {
        self.spend.saturating_sub(self.discount)
    }
}

const NO_PAIR_KEY: u64 = u64::MAX;

fn pair_key(pair: Option<&ThresholdDiscountPair>) -> u64 {
    match pair {
        Some(p) => (p.threshold().cents() << 32) ^ p.discount().cents(),
        None => NO_PAIR_KEY,
    }
}

fn utility(params: &ChoiceModelParams, consumer_key: u64, base: Money, spend: Money, pair: Option<&ThresholdDiscountPair>) -> f64 {
    let discount = pair.map_or(Money::ZERO, |p| p.discount());
    let extra = spend.saturating_sub(base);
    // Cents first, then scale: ties in exact arithmetic stay ties for dyadic rates.
    let cents = params.stretch_utility_rate * discount.cents() as f64 - params.effort_cost_rate * extra.cents() as f64;
    let mut u = cents / 100.0;
    if params.noise_scale > 0.0 {
        u += params.noise_scale * keyed_normal(params.seed, &[consumer_key, pair_key(pair)]);
    }
    u
}

pub fn choice_simulate(menu: &CampaignSet, consumer: &ConsumerProfile, params: &ChoiceModelParams) -> Choice {
    let key = fnv1a_64(consumer.consumer_id.as_bytes());
    let base = consumer.base_spend;
    let at_base = menu.triggered_pair(base);
    let mut best = Choice { spend: base, discount: at_base.map_or(Money::ZERO, |p| p.discount()), pair: at_base.copied() };
    let mut best_u = utility(params, key, base, base, at_base);

    let reach = consumer.max_spend();
    for pair in menu.iter().filter(|p| p.threshold() > base && p.threshold() <= reach) {
        let u = utility(params, key, base, pair.threshold(), Some(pair));
        if u > best_u {
            best_u = u;
            best = Choice { spend: pair.threshold(), discount: pair.discount(), pair: Some(*pair) };
        }
    }
    best
}

/// Total net revenue of `menu` over `population`.
pub fn simulator_evaluate(menu: &CampaignSet, population: &[ConsumerProfile], params: &ChoiceModelParams) -> Money {
    let cents: u64 = population
        .par_iter()
        .map(|c| choice_simulate(menu, c, params).net().cents())
        .sum();
    Money::from_cents(cents)
}

#[derive(Clone, Debug)]
pub struct SimulatorOracle {
    pub params: ChoiceModelParams,
}

impl SimulatorOracle {
    pub fn new(params: ChoiceModelParams) -> Result<Self, OracleError> {
        params.validate()?;
        Ok(SimulatorOracle { params })
    }
}

impl RevenueOracle for SimulatorOracle {
    fn name(&self) -> String {
        let p = &self.params;
        format!(
            "sim(rate_saved={},rate_effort={},noise={},seed={})",
            p.stretch_utility_rate, p.effort_cost_rate, p.noise_scale, p.seed
        )
    }

    fn evaluate(&self, menu: &CampaignSet, population: &[ConsumerProfile]) -> Result<Money, OracleError> {
        Ok(simulator_evaluate(menu, population, &self.params))
    }

    /// 1 if the consumer ends up triggering `target` under `menu_context`, else 0.
    fn evaluate_single(
        &self,
        target: &ThresholdDiscountPair,
        consumer: &ConsumerProfile,
        menu_context: &CampaignSet,
    ) -> Result<f64, OracleError> {
        let choice = choice_simulate(menu_context, consumer, &self.params);
        Ok(if choice.pair.as_ref() == Some(target) { 1.0 } else { 0.0 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noiseless() -> ChoiceModelParams {
        ChoiceModelParams { stretch_utility_rate: 1.0, effort_cost_rate: 0.25, noise_scale: 0.0, seed: 0 }
    }

    fn thirty_ten(id: &str) -> ConsumerProfile {
        ConsumerProfile::with_spend(id, Money::from_dollars(30), Money::from_dollars(10))
    }

    fn menu(pairs: &[(u64, u64)]) -> CampaignSet {
        CampaignSet::new(pairs.iter().map(|&(t, d)| ThresholdDiscountPair::dollars(t, d)).collect()).unwrap()
    }

    #[test]
    fn empty_menu_buys_base() {
        let c = choice_simulate(&CampaignSet::empty(), &thirty_ten("a"), &noiseless());
        assert_eq!((c.spend, c.discount, c.pair), (Money::from_dollars(30), Money::ZERO, None));
    }

    #[test]
    fn stretches_to_reachable_threshold() {
        // 3 - 0.25 * 9 = 0.75 > 0
        let c = choice_simulate(&menu(&[(39, 3)]), &thirty_ten("a"), &noiseless());
        assert_eq!((c.spend, c.discount), (Money::from_dollars(39), Money::from_dollars(3)));
        assert_eq!(c.net(), Money::from_dollars(36));
    }

    #[test]
    fn lower_pair_cannibalizes() {
        // Option <29,1> is met at base: utility 1 > 0.75.
        let c = choice_simulate(&menu(&[(29, 1), (39, 3)]), &thirty_ten("a"), &noiseless());
        assert_eq!((c.spend, c.discount), (Money::from_dollars(30), Money::from_dollars(1)));
        assert_eq!(c.net(), Money::from_dollars(29));
    }

    #[test]
    fn out_of_reach_threshold_ignored() {
        let c = choice_simulate(&menu(&[(41, 10)]), &thirty_ten("a"), &noiseless());
        assert_eq!(c.spend, Money::from_dollars(30));
        assert_eq!(c.pair, None);
    }

    #[test]
    fn utility_ties_prefer_smaller_spend() {
        // 1 - 0.25 * 4 = 0 equals the no-campaign utility.
        let c = choice_simulate(&menu(&[(34, 1)]), &thirty_ten("a"), &noiseless());
        assert_eq!(c.spend, Money::from_dollars(30));
    }

    #[test]
    fn evaluate_sums_consumers() {
        let pop = vec![thirty_ten("a"), thirty_ten("b")];
        let p = noiseless();
        assert_eq!(simulator_evaluate(&menu(&[(39, 3)]), &pop, &p), Money::from_dollars(72));
        assert_eq!(simulator_evaluate(&menu(&[(29, 1), (39, 3)]), &pop, &p), Money::from_dollars(58));
        assert_eq!(simulator_evaluate(&menu(&[(39, 3)]), &[], &p), Money::ZERO);
        assert_eq!(simulator_evaluate(&CampaignSet::empty(), &pop[..1], &p), Money::from_dollars(30));
    }

    #[test]
    fn noise_is_stable_per_consumer_and_pair() {
        let params = ChoiceModelParams { noise_scale: 2.0, seed: 11, ..noiseless() };
        let pop: Vec<_> = (0..200).map(|i| thirty_ten(&format!("c{i}"))).collect();
        let m = menu(&[(33, 2), (39, 3)]);
        let forward = simulator_evaluate(&m, &pop, &params);
        let mut reversed = pop.clone();
        reversed.reverse();
        assert_eq!(simulator_evaluate(&m, &reversed, &params), forward);
        let other_seed = ChoiceModelParams { seed: 12, ..params.clone() };
        assert_ne!(simulator_evaluate(&m, &pop, &other_seed), forward);
    }

    #[test]
    fn evaluate_single_is_trigger_indicator() {
        let oracle = SimulatorOracle::new(noiseless()).unwrap();
        let m = menu(&[(29, 1), (39, 3)]);
        let c = thirty_ten("a");
        assert_eq!(oracle.evaluate_single(&ThresholdDiscountPair::dollars(29, 1), &c, &m).unwrap(), 1.0);
        assert_eq!(oracle.evaluate_single(&ThresholdDiscountPair::dollars(39, 3), &c, &m).unwrap(), 0.0);
    }

    #[test]
    fn rejects_negative_rates() {
        let bad = ChoiceModelParams { effort_cost_rate: -1.0, ..noiseless() };
        assert!(SimulatorOracle::new(bad).is_err());
    }
}
