//! Value types shared by every stage: money, campaign pairs and menus,
//! business rules and consumer profiles.

mod campaign;
mod consumer;
mod money;
mod rules;

pub use campaign::{triggered_pair, CampaignSet, ThresholdDiscountPair};
pub use consumer::{ConsumerProfile, Gender};
pub use money::Money;
pub use rules::{satisfies_rules, RuleSet};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DomainError {
    #[error("discount {discount} exceeds threshold {threshold}")]
    DiscountExceedsThreshold { threshold: Money, discount: Money },
    #[error("two pairs share threshold {0}")]
    DuplicateThreshold(Money),
    #[error("invalid rules: {0}")]
    InvalidRules(String),
}
