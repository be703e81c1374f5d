use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{OracleError, RevenueOracle};
use crate::domain::{CampaignSet, ConsumerProfile, Money, ThresholdDiscountPair};

/// One row of a lift table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiftRow {
    pub threshold_cents: Money,
    pub discount_cents: Money,
    /// Signed per-consumer revenue change when the pair is on the menu.
    pub lift_cents: i64,
}

/// Additive oracle read from a table of per-pair lifts: each consumer pays
/// their base spend plus the lifts of every menu pair, floored at zero.
#[derive(Clone, Debug, Default)]
pub struct TabularOracle {
    lifts: BTreeMap<ThresholdDiscountPair, i64>,
}

impl TabularOracle {
    pub fn new(rows: impl IntoIterator<Item = (ThresholdDiscountPair, i64)>) -> Self {
        TabularOracle { lifts: rows.into_iter().collect() }
    }

    /// Reads one JSON [`LiftRow`] per line; blank lines are skipped.
    pub fn load(path: &Path) -> Result<Self, OracleError> {
        let text = std::fs::read_to_string(path).map_err(|e| OracleError::Table(format!("{}: {e}", path.display())))?;
        let mut lifts = BTreeMap::new();
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let row: LiftRow =
                serde_json::from_str(line).map_err(|e| OracleError::Table(format!("line {}: {e}", i + 1)))?;
            let pair = ThresholdDiscountPair::new(row.threshold_cents, row.discount_cents)
                .map_err(|e| OracleError::Table(format!("line {}: {e}", i + 1)))?;
            lifts.insert(pair, row.lift_cents);
        }
        Ok(TabularOracle { lifts })
    }

    fn menu_lift(&self, menu: &CampaignSet) -> i64 {
        menu.iter().map(|p| self.lifts.get(p).copied().unwrap_or(0)).sum()
    }
}

impl RevenueOracle for TabularOracle {
    fn name(&self) -> String {
        format!("tabular({} rows)", self.lifts.len())
    }

    fn evaluate(&self, menu: &CampaignSet, population: &[ConsumerProfile]) -> Result<Money, OracleError> {
        let lift = self.menu_lift(menu);
        Ok(population
            .iter()
            .map(|c| Money::from_cents((c.base_spend.cents() as i64 + lift).max(0) as u64))
            .sum())
    }

    fn evaluate_single(&self, target: &ThresholdDiscountPair, _: &ConsumerProfile, _: &CampaignSet) -> Result<f64, OracleError> {
        Ok(self.lifts.get(target).copied().unwrap_or(0) as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn additive_over_menu_and_consumers() {
        let a = ThresholdDiscountPair::dollars(30, 2);
        let b = ThresholdDiscountPair::dollars(40, 3);
        let oracle = TabularOracle::new([(a, 150), (b, -50)]);
        let pop = vec![
            ConsumerProfile::with_spend("x", Money::from_dollars(20), Money::ZERO),
            ConsumerProfile::with_spend("y", Money::from_dollars(10), Money::ZERO),
        ];
        let menu = CampaignSet::new(vec![a, b]).unwrap();
        assert_eq!(oracle.evaluate(&CampaignSet::empty(), &pop).unwrap(), Money::from_dollars(30));
        assert_eq!(oracle.evaluate(&menu, &pop).unwrap(), Money::from_cents(3000 + 200));
    }

    #[test]
    fn loads_lines_and_reports_bad_line() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, r#"{{"threshold_cents":3000,"discount_cents":200,"lift_cents":150}}"#).unwrap();
        writeln!(f).unwrap();
        writeln!(f, r#"{{"threshold_cents":100,"discount_cents":200,"lift_cents":1}}"#).unwrap();
        let err = TabularOracle::load(f.path()).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }
}
