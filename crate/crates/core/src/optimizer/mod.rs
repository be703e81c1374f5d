//! Candidate generation, rule filtering and the search strategies over
//! campaign menus.
//!
//! All searches maximize the oracle's total revenue `f(menu)` over subsets of
//! a rule-filtered candidate sequence. Ties are broken the same way
//! everywhere: higher revenue, then smaller menu, then lexicographically
//! smaller (threshold, discount) list.

mod candidates;
mod exhaustive;
mod greedy;
mod objective;
mod recommend;
mod result;
mod submodular;
mod usm;

pub use candidates::{
    filter_by_rules, generate_candidates, score_candidates, CandidateEntry, CandidatePool, DEFAULT_POOL_CAP,
};
pub use exhaustive::{exhaustive_search, SubsetValues, DEFAULT_ENUMERATION_LIMIT};
pub use greedy::greedy_search;
pub use objective::Objective;
pub use recommend::recommend_top_k;
pub use result::{rank_order, truncate_to_k, Method, OptimizationResult};
pub use submodular::{check_submodularity, SubmodularityReport, SUBMODULARITY_MAX_CANDIDATES};
pub use usm::{randomized_usm, UsmStep, UsmTrace};

use thiserror::Error;

use crate::domain::DomainError;
use crate::oracle::OracleError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizerError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("candidate pool would hold {size} pairs, above the cap of {cap}")]
    PoolTooLarge { size: u64, cap: u64 },
    #[error("candidate pool is empty")]
    EmptyPool,
    #[error("exhaustive search would enumerate {subsets} subsets, above the limit of {limit}; shrink the candidate set or bound the menu size")]
    EnumerationTooLarge { subsets: u128, limit: u128 },
    #[error("{found} candidates exceed the maximum of {max} for this check")]
    TooManyCandidates { found: usize, max: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl OptimizerError {
    /// Whether this is a refusal to run an oversized search rather than a failure.
    pub fn is_refusal(&self) -> bool {
        matches!(
            self,
            OptimizerError::PoolTooLarge { .. }
                | OptimizerError::EnumerationTooLarge { .. }
                | OptimizerError::TooManyCandidates { .. }
        )
    }
}
