//! Serialized parameters of the neural trigger-probability scorer.
//!
//! The file is a JSON document. Every matrix carries its shape and a base64
//! blob of little-endian `f64` values in row-major order.

use std::path::Path;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::OracleError;
use crate::domain::Money;
use crate::encoding::{FeatureLayout, DEFAULT_ENCODING_LENGTH, DEFAULT_ENCODING_UNIT, DENSE_FEATURES};

pub const WEIGHTS_FORMAT_VERSION: u32 = 1;
/// Width of every gated / pooled activation.
pub const GATE_WIDTH: usize = 500;

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    /// Row-major.
    pub data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    data: String,
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let bytes: Vec<u8> = self.data.iter().flat_map(|x| x.to_le_bytes()).collect();
        MatrixRepr { rows: self.rows, cols: self.cols, data: STANDARD.encode(bytes) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let repr = MatrixRepr::deserialize(d)?;
        let bytes = STANDARD.decode(repr.data.as_bytes()).map_err(D::Error::custom)?;
        if bytes.len() != repr.rows * repr.cols * 8 {
            return Err(D::Error::custom(format!(
                "matrix blob holds {} bytes, shape {}x{} needs {}",
                bytes.len(),
                repr.rows,
                repr.cols,
                repr.rows * repr.cols * 8
            )));
        }
        let data = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Ok(Matrix { rows: repr.rows, cols: repr.cols, data })
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn column(values: Vec<f64>) -> Self {
        Matrix { rows: values.len(), cols: 1, data: values }
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

/// Fully connected layer `y = W x + b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weight: Matrix,
    pub bias: Matrix,
}

impl Layer {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Layer { weight: Matrix::zeros(outputs, inputs), bias: Matrix::zeros(outputs, 1) }
    }

    pub fn inputs(&self) -> usize {
        self.weight.cols
    }

    pub fn outputs(&self) -> usize {
        self.weight.rows
    }

    fn random(rng: &mut ChaCha8Rng, inputs: usize, outputs: usize, gain: f64) -> Self {
        let std = gain * (2.0 / inputs as f64).sqrt();
        let data = (0..inputs * outputs).map(|_| std * rng.sample::<f64, _>(StandardNormal)).collect();
        let bias = (0..outputs).map(|_| 0.01 * rng.sample::<f64, _>(StandardNormal)).collect();
        Layer { weight: Matrix { rows: outputs, cols: inputs, data }, bias: Matrix::column(bias) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncodingConfig {
    pub unit_cents: Money,
    pub length: usize,
}

impl Default for EncodingConfig {
    fn default() -> Self {
        EncodingConfig { unit_cents: DEFAULT_ENCODING_UNIT, length: DEFAULT_ENCODING_LENGTH }
    }
}

/// Per-feature affine standardization `(x - mean) / scale` of the dense features.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Standardization {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Default for Standardization {
    fn default() -> Self {
        Standardization {
            mean: vec![183.0, 31.5, 31.5, 31.5, 300.0, 600.0, 900.0, 50.0, 5.0],
            scale: vec![105.0, 18.5, 18.5, 18.5, 250.0, 500.0, 750.0, 20.0, 4.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScorerWeights {
    pub format_version: u32,
    pub encoding: EncodingConfig,
    pub layout: FeatureLayout,
    pub standardization: Standardization,
    /// Dense features -> hidden -> hidden -> gate width, ReLU after each.
    pub dense_tower: Vec<Layer>,
    /// [dense tower output, sparse one-hots] -> gate width, ReLU.
    pub sparse_projection: Layer,
    /// [threshold encoding, discount encoding] -> gate width, ReLU.
    pub not_target_projection: Layer,
    /// Learned attention query, gate width x 1.
    pub attention_query: Matrix,
    /// Pooled vector used when no other pair is on the menu, gate width x 1.
    pub default_context: Matrix,
    /// Pooled context -> three hidden layers, ReLU after each.
    pub pooled_tower: Vec<Layer>,
    /// [gated vector, pooled tower output] -> three hidden ReLU layers -> one logit.
    pub head: Vec<Layer>,
}

fn check_chain(name: &str, layers: &[Layer], expect_len: usize, mut inputs: usize) -> Result<usize, OracleError> {
    if layers.len() != expect_len {
        return Err(OracleError::Weights(format!("{name} must have {expect_len} layers, found {}", layers.len())));
    }
    for (i, layer) in layers.iter().enumerate() {
        check_layer(&format!("{name}[{i}]"), layer, inputs)?;
        inputs = layer.outputs();
    }
    Ok(inputs)
}

fn check_layer(name: &str, layer: &Layer, inputs: usize) -> Result<(), OracleError> {
    if layer.inputs() != inputs {
        return Err(OracleError::DimensionMismatch { layer: name.to_string(), expected: inputs, found: layer.inputs() });
    }
    if layer.bias.rows != layer.outputs() || layer.bias.cols != 1 {
        return Err(OracleError::DimensionMismatch {
            layer: format!("{name}.bias"),
            expected: layer.outputs(),
            found: layer.bias.rows,
        });
    }
    if layer.weight.data.len() != layer.weight.rows * layer.weight.cols {
        return Err(OracleError::Weights(format!("{name}: data length does not match shape")));
    }
    if !layer.weight.is_finite() || !layer.bias.is_finite() {
        return Err(OracleError::Weights(format!("{name}: non-finite entries")));
    }
    Ok(())
}

fn check_vector(name: &str, m: &Matrix, len: usize) -> Result<(), OracleError> {
    if m.rows != len || m.cols != 1 || m.data.len() != len {
        return Err(OracleError::DimensionMismatch { layer: name.to_string(), expected: len, found: m.data.len() });
    }
    if !m.is_finite() {
        return Err(OracleError::Weights(format!("{name}: non-finite entries")));
    }
    Ok(())
}

impl ScorerWeights {
    pub fn validate(&self) -> Result<(), OracleError> {
        if self.format_version != WEIGHTS_FORMAT_VERSION {
            return Err(OracleError::UnsupportedVersion { found: self.format_version, supported: WEIGHTS_FORMAT_VERSION });
        }
        let width = self.encoding.length;
        if width != GATE_WIDTH {
            return Err(OracleError::Weights(format!("encoding length must be {GATE_WIDTH}, found {width}")));
        }
        if self.encoding.unit_cents == Money::ZERO {
            return Err(OracleError::Weights("encoding unit must be positive".into()));
        }
        let std = &self.standardization;
        if std.mean.len() != DENSE_FEATURES || std.scale.len() != DENSE_FEATURES {
            return Err(OracleError::DimensionMismatch {
                layer: "standardization".into(),
                expected: DENSE_FEATURES,
                found: std.mean.len().min(std.scale.len()),
            });
        }
        if std.scale.iter().any(|&s| !s.is_finite() || s == 0.0) || std.mean.iter().any(|m| !m.is_finite()) {
            return Err(OracleError::Weights("standardization needs finite means and non-zero scales".into()));
        }

        let dense_out = check_chain("dense_tower", &self.dense_tower, 3, DENSE_FEATURES)?;
        if dense_out != width {
            return Err(OracleError::DimensionMismatch { layer: "dense_tower[2]".into(), expected: width, found: dense_out });
        }
        check_layer("sparse_projection", &self.sparse_projection, width + self.layout.sparse_len())?;
        if self.sparse_projection.outputs() != width {
            return Err(OracleError::DimensionMismatch {
                layer: "sparse_projection".into(),
                expected: width,
                found: self.sparse_projection.outputs(),
            });
        }
        check_layer("not_target_projection", &self.not_target_projection, 2 * width)?;
        if self.not_target_projection.outputs() != width {
            return Err(OracleError::DimensionMismatch {
                layer: "not_target_projection".into(),
                expected: width,
                found: self.not_target_projection.outputs(),
            });
        }
        check_vector("attention_query", &self.attention_query, width)?;
        check_vector("default_context", &self.default_context, width)?;
        let pooled_out = check_chain("pooled_tower", &self.pooled_tower, 3, width)?;
        let logits = check_chain("head", &self.head, 4, width + pooled_out)?;
        if logits != 1 {
            return Err(OracleError::DimensionMismatch { layer: "head[3]".into(), expected: 1, found: logits });
        }
        Ok(())
    }

    /// He-initialized weights, a starting point for training and the source of
    /// the committed conformance fixtures.
    pub fn initialized(seed: u64, hidden: usize, layout: FeatureLayout) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = GATE_WIDTH;
        let rng = &mut rng;
        let dense_tower = vec![
            Layer::random(rng, DENSE_FEATURES, hidden, 1.0),
            Layer::random(rng, hidden, hidden, 1.0),
            Layer::random(rng, hidden, w, 1.0),
        ];
        let sparse_projection = Layer::random(rng, w + layout.sparse_len(), w, 1.0);
        let not_target_projection = Layer::random(rng, 2 * w, w, 0.2);
        let attention_query = Matrix::column((0..w).map(|_| 0.1 * rng.sample::<f64, _>(StandardNormal)).collect());
        let default_context = Matrix::column((0..w).map(|_| 0.5 * rng.random::<f64>()).collect());
        let pooled_tower = vec![
            Layer::random(rng, w, hidden, 1.0),
            Layer::random(rng, hidden, hidden, 1.0),
            Layer::random(rng, hidden, hidden / 2, 1.0),
        ];
        let head = vec![
            Layer::random(rng, w + hidden / 2, hidden, 1.0),
            Layer::random(rng, hidden, hidden, 1.0),
            Layer::random(rng, hidden, hidden / 2, 1.0),
            Layer::random(rng, hidden / 2, 1, 0.5),
        ];
        ScorerWeights {
            format_version: WEIGHTS_FORMAT_VERSION,
            encoding: EncodingConfig::default(),
            layout,
            standardization: Standardization::default(),
            dense_tower,
            sparse_projection,
            not_target_projection,
            attention_query,
            default_context,
            pooled_tower,
            head,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, OracleError> {
        let weights: ScorerWeights = serde_json::from_str(text).map_err(|e| OracleError::Weights(e.to_string()))?;
        weights.validate()?;
        Ok(weights)
    }

    pub fn load(path: &Path) -> Result<Self, OracleError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| OracleError::Weights(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("weights serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initialized_weights_validate() {
        ScorerWeights::initialized(1, 8, FeatureLayout::default()).validate().unwrap();
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let w = ScorerWeights::initialized(5, 4, FeatureLayout::default());
        let back = ScorerWeights::from_json(&w.to_json()).unwrap();
        assert_eq!(back, w);
    }

    #[test]
    fn refuses_other_versions() {
        let mut w = ScorerWeights::initialized(1, 4, FeatureLayout::default());
        w.format_version = 2;
        assert!(matches!(ScorerWeights::from_json(&w.to_json()), Err(OracleError::UnsupportedVersion { found: 2, .. })));
    }

    #[test]
    fn names_mismatched_layer() {
        let mut w = ScorerWeights::initialized(1, 4, FeatureLayout::default());
        w.pooled_tower[1] = Layer::zeros(7, 4);
        match w.validate() {
            Err(OracleError::DimensionMismatch { layer, expected, found }) => {
                assert_eq!(layer, "pooled_tower[1]");
                assert_eq!((expected, found), (4, 7));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_truncated_blob() {
        let m = Matrix::column(vec![1.0, 2.0]);
        let mut v = serde_json::to_value(&m).unwrap();
        v["rows"] = 3.into();
        assert!(serde_json::from_value::<Matrix>(v).is_err());
    }

    #[test]
    fn rejects_non_finite() {
        let mut w = ScorerWeights::initialized(1, 4, FeatureLayout::default());
        w.head[0].bias.data[0] = f64::NAN;
        assert!(w.validate().is_err());
    }

    #[test]
    fn blob_is_little_endian() {
        let m = Matrix::column(vec![1.0]);
        let v = serde_json::to_value(&m).unwrap();
        let bytes = STANDARD.decode(v["data"].as_str().unwrap()).unwrap();
        assert_eq!(bytes, 1.0f64.to_le_bytes());
    }
}
