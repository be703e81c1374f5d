//! Randomized double greedy for unconstrained submodular maximization.
//!
//! Two menus are kept: `X` starts empty and only grows, `Y` starts as the whole
//! candidate sequence and only shrinks. Each candidate in turn is either added
//! to `X` or removed from `Y`, with probability proportional to the positive
//! part of the respective gain. After the last candidate `X == Y`.
//! For non-negative submodular `f` the expected result is at least half the
//! optimum.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CandidatePool, Method, Objective, OptimizationResult, OptimizerError};
use crate::domain::{CampaignSet, ConsumerProfile, ThresholdDiscountPair};
use crate::oracle::RevenueOracle;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UsmStep {
    pub candidate: ThresholdDiscountPair,
    /// `f(X + c) - f(X)`.
    pub a_cents: i64,
    /// `f(Y - c) - f(Y)`.
    pub b_cents: i64,
    /// Whether the candidate went into `X` (otherwise it left `Y`).
    pub added: bool,
    /// Probability of adding that was used.
    pub probability: f64,
    pub x_size: usize,
    pub y_size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UsmTrace {
    pub seed: u64,
    pub steps: Vec<UsmStep>,
    pub final_set: CampaignSet,
}

impl UsmTrace {
    /// Replays the trace against the candidate sequence and checks
    /// `X_0 = ∅`, `Y_0 = C`, `X_i ⊆ Y_i` and `X_n = Y_n = final_set`.
    pub fn check_invariants(&self, sequence: &[ThresholdDiscountPair]) -> Result<(), String> {
        if self.steps.len() != sequence.len() {
            return Err(format!("{} steps for {} candidates", self.steps.len(), sequence.len()));
        }
        let mut x: Vec<ThresholdDiscountPair> = Vec::new();
        let mut y: Vec<ThresholdDiscountPair> = sequence.to_vec();
        for (i, (step, c)) in self.steps.iter().zip(sequence).enumerate() {
            if step.candidate != *c {
                return Err(format!("step {i} visits {} instead of {c}", step.candidate));
            }
            if step.added {
                x.push(*c);
            } else {
                y.retain(|p| p != c);
            }
            if x.len() != step.x_size || y.len() != step.y_size {
                return Err(format!("step {i}: recorded sizes do not match replay"));
            }
            if !x.iter().all(|p| y.contains(p)) {
                return Err(format!("step {i}: X is not a subset of Y"));
            }
        }
        let (x, y) = (CampaignSet::new(x).map_err(|e| e.to_string())?, CampaignSet::new(y).map_err(|e| e.to_string())?);
        if x != y {
            return Err("X and Y differ after the last step".into());
        }
        if x != self.final_set {
            return Err("final set differs from replayed X".into());
        }
        Ok(())
    }

    /// Steps with a positive gain on either side where `a + b < 0`; always zero
    /// when `f` is submodular.
    pub fn lemma_violations(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| (s.a_cents > 0 || s.b_cents > 0) && s.a_cents + s.b_cents < 0)
            .count()
    }

    /// One line per step plus a header and the final set, for human review.
    pub fn to_log(&self) -> String {
        let mut out = format!("# double greedy trace, seed {}\n", self.seed);
        out.push_str("step\tcandidate\ta_cents\tb_cents\tp_add\taction\t|X|\t|Y|\n");
        for (i, s) in self.steps.iter().enumerate() {
            let action = if s.added { "add" } else { "drop" };
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{:.6}\t{}\t{}\t{}\n",
                i + 1,
                s.candidate,
                s.a_cents,
                s.b_cents,
                s.probability,
                action,
                s.x_size,
                s.y_size
            ));
        }
        out.push_str(&format!("final\t{}\n", self.final_set));
        out
    }
}

/// Runs double greedy over the candidates in pool order.
pub fn randomized_usm(
    candidates: &CandidatePool,
    population: &[ConsumerProfile],
    oracle: &dyn RevenueOracle,
    seed: u64,
) -> Result<(OptimizationResult, UsmTrace), OptimizerError> {
    let objective = Objective::new(oracle, population);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sequence = candidates.pairs();
    let mut x = CampaignSet::empty();
    let mut y = CampaignSet::new(sequence.clone())?;
    let mut fx = objective.value(&x)?;
    let mut fy = objective.value(&y)?;
    let mut steps = Vec::with_capacity(sequence.len());

    for c in &sequence {
        let x_plus = x.with(*c)?;
        let y_minus = y.without(c);
        let fx_plus = objective.value(&x_plus)?;
        let fy_minus = objective.value(&y_minus)?;
        let a = fx_plus.signed_diff(fx);
        let b = fy_minus.signed_diff(fy);
        let (a_pos, b_pos) = (a.max(0), b.max(0));
        let probability = if a_pos + b_pos == 0 { 1.0 } else { a_pos as f64 / (a_pos + b_pos) as f64 };
        let added = rng.random::<f64>() < probability;
        if added {
            x = x_plus;
            fx = fx_plus;
        } else {
            y = y_minus;
            fy = fy_minus;
        }
        steps.push(UsmStep {
            candidate: *c,
            a_cents: a,
            b_cents: b,
            added,
            probability,
            x_size: x.len(),
            y_size: y.len(),
        });
    }
    debug_assert_eq!(x, y);
    let trace = UsmTrace { seed, steps, final_set: x.clone() };
    let result = OptimizationResult {
        method: Method::RandomizedUsm,
        campaigns: x,
        revenue: fx,
        seed: Some(seed),
        oracle: objective.oracle_name(),
        evaluations: objective.calls(),
        config_hash: None,
        wall_time_ms: None,
    };
    Ok((result, trace))
}
