use serde::{Deserialize, Serialize};

use super::{CampaignSet, DomainError, Money, ThresholdDiscountPair};

/// Business rules a displayed menu must satisfy, plus the candidate grid.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleSet {
    #[serde(rename = "min_threshold_cents")]
    pub min_threshold: Money,
    #[serde(rename = "max_threshold_cents")]
    pub max_threshold: Money,
    #[serde(rename = "threshold_step_cents")]
    pub threshold_step: Money,
    #[serde(rename = "discount_step_cents")]
    pub discount_step: Money,
    #[serde(rename = "min_threshold_gap_cents", default = "default_gap")]
    pub min_threshold_gap: Money,
    #[serde(default = "default_true")]
    pub require_monotone_discounts: bool,
}

fn default_gap() -> Money {
    Money::from_dollars(5)
}

fn default_true() -> bool {
    true
}

impl Default for RuleSet {
    fn default() -> Self {
        RuleSet {
            min_threshold: Money::from_dollars(20),
            max_threshold: Money::from_dollars(80),
            threshold_step: Money::from_dollars(1),
            discount_step: Money::from_dollars(1),
            min_threshold_gap: default_gap(),
            require_monotone_discounts: true,
        }
    }
}

impl RuleSet {
    pub fn validate(&self) -> Result<(), DomainError> {
        let fail = |msg: &str| Err(DomainError::InvalidRules(msg.to_string()));
        if self.min_threshold > self.max_threshold {
            return fail("min_threshold exceeds max_threshold");
        }
        if self.threshold_step == Money::ZERO || self.discount_step == Money::ZERO {
            return fail("steps must be positive");
        }
        if self.min_threshold_gap == Money::ZERO {
            return fail("min_threshold_gap must be positive");
        }
        Ok(())
    }

    /// Whether the pair's threshold lies inside the configured range.
    pub fn in_range(&self, pair: &ThresholdDiscountPair) -> bool {
        (self.min_threshold..=self.max_threshold).contains(&pair.threshold())
    }
}

/// Checks the menu-level rules on an arbitrary collection of pairs:
/// distinct thresholds, adjacent gaps of at least `min_threshold_gap`, and
/// (when required) strictly increasing discounts.
pub fn satisfies_rules(pairs: &[ThresholdDiscountPair], rules: &RuleSet) -> bool {
    let mut sorted = pairs.to_vec();
    sorted.sort();
    sorted.windows(2).all(|w| {
        let (lo, hi) = (w[0], w[1]);
        if lo.threshold() == hi.threshold() {
            return false;
        }
        if hi.threshold().cents() - lo.threshold().cents() < rules.min_threshold_gap.cents() {
            return false;
        }
        !rules.require_monotone_discounts || hi.discount() > lo.discount()
    })
}

impl CampaignSet {
    pub fn satisfies(&self, rules: &RuleSet) -> bool {
        satisfies_rules(self.pairs(), rules)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(t: u64, d: u64) -> ThresholdDiscountPair {
        ThresholdDiscountPair::dollars(t, d)
    }

    #[test]
    fn increasing_discount_with_enough_gap() {
        assert!(satisfies_rules(&[p(50, 4), p(60, 5)], &RuleSet::default()));
    }

    #[test]
    fn decreasing_discount_rejected() {
        assert!(!satisfies_rules(&[p(50, 4), p(60, 3)], &RuleSet::default()));
        // Equal discounts are not an increase either.
        assert!(!satisfies_rules(&[p(50, 4), p(60, 4)], &RuleSet::default()));
    }

    #[test]
    fn narrow_gap_rejected() {
        assert!(!satisfies_rules(&[p(50, 4), p(52, 5)], &RuleSet::default()));
        assert!(satisfies_rules(&[p(50, 4), p(55, 5)], &RuleSet::default()));
    }

    #[test]
    fn one_discount_per_threshold() {
        assert!(!satisfies_rules(&[p(60, 1), p(60, 2)], &RuleSet::default()));
    }

    #[test]
    fn monotone_rule_can_be_disabled() {
        let rules = RuleSet { require_monotone_discounts: false, ..RuleSet::default() };
        assert!(satisfies_rules(&[p(50, 4), p(60, 3)], &rules));
    }

    #[test]
    fn empty_and_singletons_pass() {
        let rules = RuleSet::default();
        assert!(satisfies_rules(&[], &rules));
        for t in 20..=80 {
            assert!(satisfies_rules(&[p(t, 1)], &rules));
        }
    }

    #[test]
    fn validation() {
        assert!(RuleSet::default().validate().is_ok());
        let bad = RuleSet { threshold_step: Money::ZERO, ..RuleSet::default() };
        assert!(bad.validate().is_err());
        let inverted = RuleSet { min_threshold: Money::from_dollars(90), ..RuleSet::default() };
        assert!(inverted.validate().is_err());
    }

    #[test]
    fn serde_defaults_gap_and_monotone() {
        let json = r#"{"min_threshold_cents":1000,"max_threshold_cents":2000,"threshold_step_cents":100,"discount_step_cents":100}"#;
        let rules: RuleSet = serde_json::from_str(json).unwrap();
        assert_eq!(rules.min_threshold_gap, Money::from_dollars(5));
        assert!(rules.require_monotone_discounts);
    }
}
