use serde::{Deserialize, Serialize};

use super::Money;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Female,
    Male,
    Unknown,
}

impl Gender {
    pub const COUNT: usize = 3;

    pub fn index(self) -> usize {
        match self {
            Gender::Female => 0,
            Gender::Male => 1,
            Gender::Unknown => 2,
        }
    }
}

/// One potential customer of a shop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConsumerProfile {
    pub consumer_id: String,
    /// Intended basket value absent any campaign.
    #[serde(rename = "base_spend_cents")]
    pub base_spend: Money,
    /// Most the consumer will add on top of `base_spend` to reach a threshold.
    #[serde(rename = "stretch_cents")]
    pub stretch: Money,
    pub age_bucket: u8,
    pub gender: Gender,
    pub shop_category: u8,
    #[serde(rename = "gmv_30d_cents")]
    pub gmv_30d: Money,
    #[serde(rename = "gmv_60d_cents")]
    pub gmv_60d: Money,
    #[serde(rename = "gmv_90d_cents")]
    pub gmv_90d: Money,
    pub distance_to_shop_m: f64,
}

impl ConsumerProfile {
    /// A profile with only the spending fields set; demographics are neutral.
    pub fn with_spend(id: impl Into<String>, base_spend: Money, stretch: Money) -> Self {
        ConsumerProfile {
            consumer_id: id.into(),
            base_spend,
            stretch,
            age_bucket: 0,
            gender: Gender::Unknown,
            shop_category: 0,
            gmv_30d: Money::ZERO,
            gmv_60d: Money::ZERO,
            gmv_90d: Money::ZERO,
            distance_to_shop_m: 0.0,
        }
    }

    /// Largest basket the consumer would consider.
    pub fn max_spend(&self) -> Money {
        self.base_spend + self.stretch
    }
}
