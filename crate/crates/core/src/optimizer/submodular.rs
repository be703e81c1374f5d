use serde::{Deserialize, Serialize};

use super::{CandidatePool, OptimizerError, SubsetValues};
use crate::domain::{ConsumerProfile, ThresholdDiscountPair};
use crate::oracle::RevenueOracle;

pub const SUBMODULARITY_MAX_CANDIDATES: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubmodularityReport {
    pub candidates: usize,
    /// Number of (A ⊆ B, u ∉ B) triples tested.
    pub triples: u64,
    pub violations: u64,
    /// Largest `[f(B+u) - f(B)] - [f(A+u) - f(A)]` over violating triples, in cents.
    pub worst_violation_cents: i64,
    pub worst_example: Option<ViolationExample>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViolationExample {
    pub a: Vec<ThresholdDiscountPair>,
    pub b: Vec<ThresholdDiscountPair>,
    pub u: ThresholdDiscountPair,
}

impl SubmodularityReport {
    pub fn is_submodular(&self) -> bool {
        self.violations == 0
    }

    pub fn violation_rate(&self) -> f64 {
        if self.triples == 0 {
            0.0
        } else {
            self.violations as f64 / self.triples as f64
        }
    }
}

impl SubsetValues {
    /// Brute-force diminishing-returns check over every `A ⊆ B`, `u ∉ B`.
    pub fn submodularity(&self) -> SubmodularityReport {
        let n = self.len();
        let full = (1usize << n) - 1;
        let f = |m: usize| self.value(m).cents() as i64;
        let (mut triples, mut violations, mut worst) = (0u64, 0u64, 0i64);
        let mut worst_at = None;
        for b in 0..=full {
            let fb = f(b);
            for u in (0..n).filter(|u| b >> u & 1 == 0) {
                let gain_b = f(b | 1 << u) - fb;
                let mut a = b;
                loop {
                    triples += 1;
                    let gain_a = f(a | 1 << u) - f(a);
                    if gain_a < gain_b {
                        violations += 1;
                        if gain_b - gain_a > worst {
                            worst = gain_b - gain_a;
                            worst_at = Some((a, b, u));
                        }
                    }
                    if a == 0 {
                        break;
                    }
                    a = (a - 1) & b;
                }
            }
        }
        let pick = |mask: usize| self.menu(mask).pairs().to_vec();
        SubmodularityReport {
            candidates: n,
            triples,
            violations,
            worst_violation_cents: worst,
            worst_example: worst_at.map(|(a, b, u)| ViolationExample { a: pick(a), b: pick(b), u: self.pairs[u] }),
        }
    }
}

pub fn check_submodularity(
    candidates: &CandidatePool,
    population: &[ConsumerProfile],
    oracle: &dyn RevenueOracle,
) -> Result<SubmodularityReport, OptimizerError> {
    Ok(SubsetValues::compute(candidates, population, oracle, SUBMODULARITY_MAX_CANDIDATES)?.submodularity())
}
