use std::sync::atomic::{AtomicU64, Ordering};

use crate::domain::{CampaignSet, ConsumerProfile, Money};
use crate::oracle::{OracleError, RevenueOracle};

/// `f(menu)` for a fixed oracle and population, counting oracle calls.
pub struct Objective<'a> {
    oracle: &'a dyn RevenueOracle,
    population: &'a [ConsumerProfile],
    calls: AtomicU64,
}

impl<'a> Objective<'a> {
    pub fn new(oracle: &'a dyn RevenueOracle, population: &'a [ConsumerProfile]) -> Self {
        Objective { oracle, population, calls: AtomicU64::new(0) }
    }

    pub fn value(&self, menu: &CampaignSet) -> Result<Money, OracleError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.oracle.evaluate(menu, self.population)
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn oracle_name(&self) -> String {
        self.oracle.name()
    }

    pub fn population(&self) -> &'a [ConsumerProfile] {
        self.population
    }
}
