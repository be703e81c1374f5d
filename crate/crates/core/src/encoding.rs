//! Feature assembly for the neural scorer and the isotonic (thermometer)
//! encoding of money amounts.
//!
//! A value `v` encoded with unit `u` and length `L` becomes a 0/1 vector whose
//! first `min(floor(v/u), L)` entries are one and the rest zero.

use std::sync::atomic::{AtomicU64, Ordering};

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{CampaignSet, ConsumerProfile, Gender, Money, ThresholdDiscountPair};

pub const DEFAULT_ENCODING_LENGTH: usize = 500;
pub const DEFAULT_ENCODING_UNIT: Money = Money::from_dollars(1);
pub const DENSE_FEATURES: usize = 9;

static CLAMP_EVENTS: AtomicU64 = AtomicU64::new(0);

/// Number of encodings so far whose value exceeded the vector length.
pub fn clamp_events() -> u64 {
    CLAMP_EVENTS.load(Ordering::Relaxed)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EncodingError {
    #[error("target pair {0} is not part of the menu")]
    TargetNotInMenu(ThresholdDiscountPair),
    #[error("{field} value {value} outside 0..{cardinality}")]
    CategoryOutOfRange { field: &'static str, value: usize, cardinality: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsotonicVector {
    bits: Vec<u8>,
}

impl IsotonicVector {
    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn popcount(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    pub fn is_monotone(&self) -> bool {
        self.bits.windows(2).all(|w| w[0] >= w[1])
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.bits.iter().map(|&b| b as f64).collect()
    }
}

/// Thermometer-encodes `value` in steps of `unit` into `length` bits.
///
/// Panics if `unit` is zero or `length` is zero.
pub fn isotonic_encode(value: Money, unit: Money, length: usize) -> IsotonicVector {
    assert!(unit.cents() > 0, "encoding unit must be positive");
    assert!(length > 0, "encoding length must be positive");
    let steps = value.cents() / unit.cents();
    let ones = if steps > length as u64 {
        CLAMP_EVENTS.fetch_add(1, Ordering::Relaxed);
        length
    } else {
        steps as usize
    };
    let mut bits = vec![0u8; length];
    bits[..ones].fill(1);
    IsotonicVector { bits }
}

/// Cardinalities of the categorical and hashed features.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureLayout {
    pub id_buckets: usize,
    pub shop_categories: usize,
    pub age_buckets: usize,
    pub genders: usize,
}

impl Default for FeatureLayout {
    fn default() -> Self {
        FeatureLayout { id_buckets: 64, shop_categories: 8, age_buckets: 8, genders: Gender::COUNT }
    }
}

impl FeatureLayout {
    pub fn sparse_len(&self) -> usize {
        self.shop_categories + self.age_buckets + self.genders
    }
}

/// Shop-side categorical context of a scoring request.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShopContext {
    pub shop_id: String,
    pub city_id: String,
    pub category: u8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureBundle {
    /// Order date day-of-year, shop/city/customer id buckets, GMV 30/60/90 days,
    /// target threshold and discount. Money in whole currency units, unstandardized.
    pub dense: Vec<f64>,
    /// One-hot shop category, age bucket and gender, concatenated.
    pub sparse_onehot: Vec<u8>,
    pub target: ThresholdDiscountPair,
    pub not_target: Vec<ThresholdDiscountPair>,
}

/// 64-bit FNV-1a.
pub fn fnv1a_64(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    bytes.iter().fold(OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(PRIME))
}

pub fn id_bucket(id: &str, buckets: usize) -> usize {
    (fnv1a_64(id.as_bytes()) % buckets as u64) as usize
}

fn one_hot(out: &mut Vec<u8>, field: &'static str, value: usize, cardinality: usize) -> Result<(), EncodingError> {
    if value >= cardinality {
        return Err(EncodingError::CategoryOutOfRange { field, value, cardinality });
    }
    let start = out.len();
    out.resize(start + cardinality, 0);
    out[start + value] = 1;
    Ok(())
}

pub fn assemble_features(
    consumer: &ConsumerProfile,
    shop: &ShopContext,
    target: &ThresholdDiscountPair,
    menu: &CampaignSet,
    as_of: NaiveDate,
    layout: &FeatureLayout,
) -> Result<FeatureBundle, EncodingError> {
    if !menu.contains(target) {
        return Err(EncodingError::TargetNotInMenu(*target));
    }
    let dense = vec![
        as_of.ordinal() as f64,
        id_bucket(&shop.shop_id, layout.id_buckets) as f64,
        id_bucket(&shop.city_id, layout.id_buckets) as f64,
        id_bucket(&consumer.consumer_id, layout.id_buckets) as f64,
        consumer.gmv_30d.as_units(),
        consumer.gmv_60d.as_units(),
        consumer.gmv_90d.as_units(),
        target.threshold().as_units(),
        target.discount().as_units(),
    ];
    let mut sparse_onehot = Vec::with_capacity(layout.sparse_len());
    one_hot(&mut sparse_onehot, "shop_category", shop.category as usize, layout.shop_categories)?;
    one_hot(&mut sparse_onehot, "age_bucket", consumer.age_bucket as usize, layout.age_buckets)?;
    one_hot(&mut sparse_onehot, "gender", consumer.gender.index(), layout.genders)?;
    let not_target = menu.iter().filter(|p| *p != target).copied().collect();
    Ok(FeatureBundle { dense, sparse_onehot, target: *target, not_target })
}
