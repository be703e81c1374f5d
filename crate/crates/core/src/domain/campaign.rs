use std::fmt;

use serde::{Deserialize, Serialize};

use super::{DomainError, Money};

/// A campaign rule: spend at least `threshold`, save `discount`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawPair")]
pub struct ThresholdDiscountPair {
    #[serde(rename = "threshold_cents")]
    threshold: Money,
    #[serde(rename = "discount_cents")]
    discount: Money,
}

#[derive(Deserialize)]
struct RawPair {
    threshold_cents: Money,
    discount_cents: Money,
}

impl TryFrom<RawPair> for ThresholdDiscountPair {
    type Error = DomainError;

    fn try_from(raw: RawPair) -> Result<Self, Self::Error> {
        ThresholdDiscountPair::new(raw.threshold_cents, raw.discount_cents)
    }
}

impl ThresholdDiscountPair {
    pub fn new(threshold: Money, discount: Money) -> Result<Self, DomainError> {
        if discount > threshold {
            return Err(DomainError::DiscountExceedsThreshold { threshold, discount });
        }
        Ok(ThresholdDiscountPair { threshold, discount })
    }

    /// Convenience constructor in whole dollars. Panics if `discount > threshold`.
    pub fn dollars(threshold: u64, discount: u64) -> Self {
        Self::new(Money::from_dollars(threshold), Money::from_dollars(discount))
            .expect("discount must not exceed threshold")
    }

    pub fn threshold(&self) -> Money {
        self.threshold
    }

    pub fn discount(&self) -> Money {
        self.discount
    }

    /// What a consumer pays when the pair triggers at exactly its threshold.
    pub fn net_at_threshold(&self) -> Money {
        self.threshold.saturating_sub(self.discount)
    }
}

impl fmt::Display for ThresholdDiscountPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.threshold.cents().is_multiple_of(100) && self.discount.cents().is_multiple_of(100) {
            write!(f, "<{},{}>", self.threshold.cents() / 100, self.discount.cents() / 100)
        } else {
            write!(f, "<{},{}>", self.threshold.as_units(), self.discount.as_units())
        }
    }
}

/// A shop's campaign menu, kept sorted by strictly increasing threshold.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<ThresholdDiscountPair>", into = "Vec<ThresholdDiscountPair>")]
pub struct CampaignSet {
    pairs: Vec<ThresholdDiscountPair>,
}

impl TryFrom<Vec<ThresholdDiscountPair>> for CampaignSet {
    type Error = DomainError;

    fn try_from(pairs: Vec<ThresholdDiscountPair>) -> Result<Self, Self::Error> {
        CampaignSet::new(pairs)
    }
}

impl From<CampaignSet> for Vec<ThresholdDiscountPair> {
    fn from(set: CampaignSet) -> Self {
        set.pairs
    }
}

impl CampaignSet {
    pub fn empty() -> Self {
        CampaignSet { pairs: Vec::new() }
    }

    /// Builds a menu from pairs in any order. Fails if two pairs share a threshold.
    pub fn new(mut pairs: Vec<ThresholdDiscountPair>) -> Result<Self, DomainError> {
        pairs.sort_by_key(|p| p.threshold);
        if let Some(w) = pairs.windows(2).find(|w| w[0].threshold == w[1].threshold) {
            return Err(DomainError::DuplicateThreshold(w[0].threshold));
        }
        Ok(CampaignSet { pairs })
    }

    pub fn single(pair: ThresholdDiscountPair) -> Self {
        CampaignSet { pairs: vec![pair] }
    }

    pub fn pairs(&self) -> &[ThresholdDiscountPair] {
        &self.pairs
    }

    pub fn iter(&self) -> impl Iterator<Item = &ThresholdDiscountPair> {
        self.pairs.iter()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, pair: &ThresholdDiscountPair) -> bool {
        self.pairs.binary_search(pair).is_ok()
    }

    /// Copy of this menu with `pair` added.
    pub fn with(&self, pair: ThresholdDiscountPair) -> Result<Self, DomainError> {
        let mut pairs = self.pairs.clone();
        pairs.push(pair);
        CampaignSet::new(pairs)
    }

    /// Copy of this menu with `pair` removed (no-op if absent).
    pub fn without(&self, pair: &ThresholdDiscountPair) -> Self {
        CampaignSet {
            pairs: self.pairs.iter().filter(|p| *p != pair).copied().collect(),
        }
    }

    /// The pair that applies to a basket: the highest threshold not above it.
    pub fn triggered_pair(&self, basket: Money) -> Option<&ThresholdDiscountPair> {
        let met = self.pairs.partition_point(|p| p.threshold <= basket);
        met.checked_sub(1).map(|i| &self.pairs[i])
    }

    /// Amount paid for a basket after the triggered discount.
    pub fn payable(&self, basket: Money) -> Money {
        match self.triggered_pair(basket) {
            Some(p) => basket.saturating_sub(p.discount),
            None => basket,
        }
    }

    /// Lexicographic key over thresholds then discounts, used for total tie-breaking.
    pub fn sort_key(&self) -> Vec<(Money, Money)> {
        self.pairs.iter().map(|p| (p.threshold, p.discount)).collect()
    }
}

impl fmt::Display for CampaignSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, p) in self.pairs.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("}")
    }
}

/// Free-function form of [`CampaignSet::triggered_pair`].
pub fn triggered_pair(set: &CampaignSet, basket: Money) -> Option<ThresholdDiscountPair> {
    set.triggered_pair(basket).copied()
}
