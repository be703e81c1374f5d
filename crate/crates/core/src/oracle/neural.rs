//! Forward pass of the trigger-probability scorer and the revenue oracle built on it.
//!
//! Topology: the dense features go through a three-layer tower up to the gate
//! width, are joined with the sparse one-hots and projected back to the gate
//! width, then multiplied element-wise by the isotonic encodings of the target
//! threshold and target discount. Every other pair on the menu is embedded from
//! its own encodings; the embeddings are pooled by scaled dot-product attention
//! against a learned query and passed through a three-layer tower. Both branches
//! are concatenated and fed to a three-hidden-layer head ending in one logit.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use chrono::NaiveDate;
use rayon::prelude::*;

use super::weights::{Layer, ScorerWeights};
use super::{OracleError, RevenueOracle};
use crate::domain::{CampaignSet, ConsumerProfile, Money, ThresholdDiscountPair};
use crate::encoding::{assemble_features, isotonic_encode, FeatureBundle, ShopContext, DENSE_FEATURES};

fn affine(layer: &Layer, x: &[f64], relu: bool, name: &str) -> Result<Vec<f64>, OracleError> {
    if x.len() != layer.inputs() {
        return Err(OracleError::DimensionMismatch { layer: name.to_string(), expected: layer.inputs(), found: x.len() });
    }
    let mut out = Vec::with_capacity(layer.outputs());
    for r in 0..layer.outputs() {
        let dot: f64 = layer.weight.row(r).iter().zip(x).map(|(w, v)| w * v).sum();
        let y = dot + layer.bias.data[r];
        if !y.is_finite() {
            return Err(OracleError::NonFinite { layer: name.to_string() });
        }
        out.push(if relu { y.max(0.0) } else { y });
    }
    Ok(out)
}

fn tower(layers: &[Layer], mut x: Vec<f64>, name: &str, relu_last: bool) -> Result<Vec<f64>, OracleError> {
    let last = layers.len() - 1;
    for (i, layer) in layers.iter().enumerate() {
        x = affine(layer, &x, i < last || relu_last, &format!("{name}[{i}]"))?;
    }
    Ok(x)
}

/// Multiplies activations by a 0/1 gate, element-wise.
pub fn apply_gate(activations: &mut [f64], gate: &[u8]) {
    for (a, &g) in activations.iter_mut().zip(gate) {
        if g == 0 {
            *a = 0.0;
        }
    }
}

/// Embedding of one not-target pair.
pub fn pair_embedding(pair: &ThresholdDiscountPair, weights: &ScorerWeights) -> Result<Vec<f64>, OracleError> {
    let enc = &weights.encoding;
    let mut input = isotonic_encode(pair.threshold(), enc.unit_cents, enc.length).to_f64();
    input.extend(isotonic_encode(pair.discount(), enc.unit_cents, enc.length).to_f64());
    affine(&weights.not_target_projection, &input, true, "not_target_projection")
}

/// Attention-pooled context vector; the stored default when there is nothing to pool.
pub fn pool_context(embeddings: &[Arc<Vec<f64>>], weights: &ScorerWeights) -> Result<Vec<f64>, OracleError> {
    if embeddings.is_empty() {
        return Ok(weights.default_context.data.clone());
    }
    let query = &weights.attention_query.data;
    let scale = (query.len() as f64).sqrt();
    let scores: Vec<f64> = embeddings
        .iter()
        .map(|e| e.iter().zip(query).map(|(a, b)| a * b).sum::<f64>() / scale)
        .collect();
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = exp.iter().sum();
    let mut pooled = vec![0.0; query.len()];
    for (e, w) in embeddings.iter().zip(&exp) {
        let alpha = w / total;
        for (p, v) in pooled.iter_mut().zip(e.iter()) {
            *p += alpha * v;
        }
    }
    if pooled.iter().any(|x| !x.is_finite()) {
        return Err(OracleError::NonFinite { layer: "attention_pool".into() });
    }
    Ok(pooled)
}

/// Target branch output after both isotonic gates.
pub fn gated_target(bundle: &FeatureBundle, weights: &ScorerWeights) -> Result<Vec<f64>, OracleError> {
    if bundle.dense.len() != DENSE_FEATURES {
        return Err(OracleError::DimensionMismatch {
            layer: "dense_tower[0]".into(),
            expected: DENSE_FEATURES,
            found: bundle.dense.len(),
        });
    }
    let std = &weights.standardization;
    let x: Vec<f64> = bundle.dense.iter().zip(&std.mean).zip(&std.scale).map(|((x, m), s)| (x - m) / s).collect();
    let mut h = tower(&weights.dense_tower, x, "dense_tower", true)?;
    h.extend(bundle.sparse_onehot.iter().map(|&b| b as f64));
    let mut g = affine(&weights.sparse_projection, &h, true, "sparse_projection")?;
    let enc = &weights.encoding;
    apply_gate(&mut g, isotonic_encode(bundle.target.threshold(), enc.unit_cents, enc.length).bits());
    apply_gate(&mut g, isotonic_encode(bundle.target.discount(), enc.unit_cents, enc.length).bits());
    Ok(g)
}

fn logit_with<F>(bundle: &FeatureBundle, weights: &ScorerWeights, embed: F) -> Result<f64, OracleError>
where
    F: Fn(&ThresholdDiscountPair) -> Result<Arc<Vec<f64>>, OracleError>,
{
    let mut joined = gated_target(bundle, weights)?;
    let embeddings = bundle.not_target.iter().map(embed).collect::<Result<Vec<_>, _>>()?;
    let pooled = pool_context(&embeddings, weights)?;
    joined.extend(tower(&weights.pooled_tower, pooled, "pooled_tower", true)?);
    let out = tower(&weights.head, joined, "head", false)?;
    Ok(out[0])
}

/// Pre-sigmoid output of the scorer.
pub fn neural_logit(bundle: &FeatureBundle, weights: &ScorerWeights) -> Result<f64, OracleError> {
    logit_with(bundle, weights, |p| pair_embedding(p, weights).map(Arc::new))
}

pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Probability that the consumer triggers the target pair.
pub fn neural_score(bundle: &FeatureBundle, weights: &ScorerWeights) -> Result<f64, OracleError> {
    neural_logit(bundle, weights).map(sigmoid)
}

/// Revenue oracle backed by the scorer. Pair embeddings are cached because
/// they depend only on the pair.
#[derive(Debug)]
pub struct NeuralOracle {
    weights: ScorerWeights,
    shop: ShopContext,
    as_of: NaiveDate,
    embeddings: RwLock<HashMap<ThresholdDiscountPair, Arc<Vec<f64>>>>,
}

impl NeuralOracle {
    pub fn new(weights: ScorerWeights, shop: ShopContext, as_of: NaiveDate) -> Result<Self, OracleError> {
        weights.validate()?;
        Ok(NeuralOracle { weights, shop, as_of, embeddings: RwLock::new(HashMap::new()) })
    }

    pub fn weights(&self) -> &ScorerWeights {
        &self.weights
    }

    fn embedding(&self, pair: &ThresholdDiscountPair) -> Result<Arc<Vec<f64>>, OracleError> {
        if let Some(e) = self.embeddings.read().unwrap().get(pair) {
            return Ok(e.clone());
        }
        let e = Arc::new(pair_embedding(pair, &self.weights)?);
        self.embeddings.write().unwrap().insert(*pair, e.clone());
        Ok(e)
    }

    fn logit(&self, target: &ThresholdDiscountPair, consumer: &ConsumerProfile, menu: &CampaignSet) -> Result<f64, OracleError> {
        let bundle = assemble_features(consumer, &self.shop, target, menu, self.as_of, &self.weights.layout)?;
        logit_with(&bundle, &self.weights, |p| self.embedding(p))
    }

    /// Expected net revenue from one consumer, in cents.
    ///
    /// Pair logits compete with a fixed no-trigger logit of 0, so trigger
    /// probabilities over the menu plus "no trigger" sum to one.
    pub fn consumer_revenue_cents(&self, menu: &CampaignSet, consumer: &ConsumerProfile) -> Result<f64, OracleError> {
        if menu.is_empty() {
            return Ok(0.0);
        }
        let logits = menu.iter().map(|p| self.logit(p, consumer, menu)).collect::<Result<Vec<_>, _>>()?;
        let max = logits.iter().cloned().fold(0.0, f64::max);
        let weights: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
        let total = (-max).exp() + weights.iter().sum::<f64>();
        Ok(menu
            .iter()
            .zip(&weights)
            .map(|(p, w)| w / total * p.net_at_threshold().cents() as f64)
            .sum())
    }
}

impl RevenueOracle for NeuralOracle {
    fn name(&self) -> String {
        format!("neural(v{},shop={})", self.weights.format_version, self.shop.shop_id)
    }

    fn evaluate(&self, menu: &CampaignSet, population: &[ConsumerProfile]) -> Result<Money, OracleError> {
        let per_consumer = population
            .par_iter()
            .map(|c| self.consumer_revenue_cents(menu, c))
            .collect::<Result<Vec<_>, _>>()?;
        // Sequential sum keeps the result independent of the worker count.
        Ok(Money::from_cents_f64(per_consumer.iter().sum()))
    }

    fn evaluate_single(
        &self,
        target: &ThresholdDiscountPair,
        consumer: &ConsumerProfile,
        menu_context: &CampaignSet,
    ) -> Result<f64, OracleError> {
        self.logit(target, consumer, menu_context).map(sigmoid)
    }
}

/// Expected net revenue of `menu` over `population` under the scorer.
pub fn neural_evaluate(
    menu: &CampaignSet,
    population: &[ConsumerProfile],
    weights: &ScorerWeights,
    shop: &ShopContext,
    as_of: NaiveDate,
) -> Result<Money, OracleError> {
    NeuralOracle::new(weights.clone(), shop.clone(), as_of)?.evaluate(menu, population)
}
