use std::io::{BufRead, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedIndex;
use rand_distr::{Distribution, LogNormal, Poisson};
use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::domain::{ConsumerProfile, Gender, Money};

/// Distribution parameters for a synthetic consumer population.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthesisSpec {
    pub count: usize,
    /// Mean of the log-normal intended basket value.
    #[serde(rename = "mean_spend_cents")]
    pub mean_spend: Money,
    /// Standard deviation of log basket value.
    pub spend_sigma: f64,
    /// Mean stretch as a fraction of the basket value.
    pub stretch_ratio: f64,
    /// Standard deviation of the log-normal multiplier on the stretch.
    pub stretch_sigma: f64,
    /// Mean orders per 30 days, used for the GMV history.
    pub orders_per_month: f64,
    pub age_weights: Vec<f64>,
    /// Female, male, unknown.
    pub gender_weights: Vec<f64>,
    pub shop_category_weights: Vec<f64>,
    /// Distances are uniform on [0, max_distance_m].
    pub max_distance_m: f64,
    pub id_prefix: String,
}

impl Default for SynthesisSpec {
    fn default() -> Self {
        SynthesisSpec {
            count: 300,
            mean_spend: Money::from_dollars(35),
            spend_sigma: 0.35,
            stretch_ratio: 0.15,
            stretch_sigma: 0.5,
            orders_per_month: 3.0,
            age_weights: vec![0.05, 0.2, 0.3, 0.2, 0.12, 0.08, 0.04, 0.01],
            gender_weights: vec![0.48, 0.47, 0.05],
            shop_category_weights: vec![1.0],
            max_distance_m: 3000.0,
            id_prefix: "c".into(),
        }
    }
}

impl SynthesisSpec {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |msg: &str| Err(PipelineError::Config(format!("population synthesis: {msg}")));
        let finite_nonneg = |x: f64| x.is_finite() && x >= 0.0;
        if self.count == 0 {
            return bad("count must be positive");
        }
        if self.mean_spend == Money::ZERO {
            return bad("mean_spend_cents must be positive");
        }
        if ![self.spend_sigma, self.stretch_ratio, self.stretch_sigma, self.max_distance_m, self.orders_per_month]
            .into_iter()
            .all(finite_nonneg)
        {
            return bad("sigmas, ratios, rates and distances must be finite and non-negative");
        }
        for (name, weights, max_len) in [
            ("age_weights", &self.age_weights, 256),
            ("gender_weights", &self.gender_weights, Gender::COUNT),
            ("shop_category_weights", &self.shop_category_weights, 256),
        ] {
            if weights.is_empty() || weights.len() > max_len {
                return bad(&format!("{name} must have 1..={max_len} entries"));
            }
            if !weights.iter().all(|&w| finite_nonneg(w)) || weights.iter().sum::<f64>() <= 0.0 {
                return bad(&format!("{name} must be non-negative with a positive sum"));
            }
        }
        Ok(())
    }
}

fn gender_of(index: usize) -> Gender {
    match index {
        0 => Gender::Female,
        1 => Gender::Male,
        _ => Gender::Unknown,
    }
}

/// Seed-deterministic synthetic population.
pub fn synthesize_population(spec: &SynthesisSpec, seed: u64) -> Result<Vec<ConsumerProfile>, PipelineError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let config_err = |e: rand_distr::weighted::Error| PipelineError::Config(format!("population synthesis: {e}"));
    let mean = spec.mean_spend.cents() as f64;
    let spend = LogNormal::new(mean.ln() - spec.spend_sigma.powi(2) / 2.0, spec.spend_sigma)
        .map_err(|e| PipelineError::Config(format!("population synthesis: {e}")))?;
    let stretch_noise = LogNormal::new(-spec.stretch_sigma.powi(2) / 2.0, spec.stretch_sigma)
        .map_err(|e| PipelineError::Config(format!("population synthesis: {e}")))?;
    let ages = WeightedIndex::new(&spec.age_weights).map_err(config_err)?;
    let genders = WeightedIndex::new(&spec.gender_weights).map_err(config_err)?;
    let categories = WeightedIndex::new(&spec.shop_category_weights).map_err(config_err)?;
    let orders = if spec.orders_per_month > 0.0 {
        Some(Poisson::new(spec.orders_per_month).map_err(|e| PipelineError::Config(format!("population synthesis: {e}")))?)
    } else {
        None
    };

    let mut out = Vec::with_capacity(spec.count);
    for i in 0..spec.count {
        let base: f64 = spend.sample(&mut rng);
        let stretch = base * spec.stretch_ratio * stretch_noise.sample(&mut rng);
        let mut month = || orders.map_or(0.0, |d| d.sample(&mut rng)) * base;
        let (m1, m2, m3) = (month(), month(), month());
        out.push(ConsumerProfile {
            consumer_id: format!("{}{:06}", spec.id_prefix, i),
            base_spend: Money::from_cents_f64(base),
            stretch: Money::from_cents_f64(stretch),
            age_bucket: ages.sample(&mut rng) as u8,
            gender: gender_of(genders.sample(&mut rng)),
            shop_category: categories.sample(&mut rng) as u8,
            gmv_30d: Money::from_cents_f64(m1),
            gmv_60d: Money::from_cents_f64(m1 + m2),
            gmv_90d: Money::from_cents_f64(m1 + m2 + m3),
            distance_to_shop_m: (rng.random::<f64>() * spec.max_distance_m * 10.0).round() / 10.0,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct IngestReport {
    pub consumers: Vec<ConsumerProfile>,
    /// Valid rows dropped for lying outside the radius.
    pub outside_radius: usize,
    pub warnings: Vec<String>,
}

/// Reads one consumer per line and keeps those within `radius_m` of the shop.
/// Blank lines are ignored; any malformed row fails the whole read.
pub fn ingest_population(path: &Path, radius_m: f64) -> Result<IngestReport, PipelineError> {
    let file = std::fs::File::open(path).map_err(|e| PipelineError::Data(format!("{}: {e}", path.display())))?;
    read_population(std::io::BufReader::new(file), radius_m, &path.display().to_string())
}

pub fn read_population(reader: impl BufRead, radius_m: f64, source: &str) -> Result<IngestReport, PipelineError> {
    let mut consumers = Vec::new();
    let mut outside_radius = 0;
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| PipelineError::Data(format!("{source}: {e}")))?;
        if line.trim().is_empty() {
            continue;
        }
        let row: ConsumerProfile = serde_json::from_str(&line)
            .map_err(|e| PipelineError::Data(format!("{source}: line {}: {e}", i + 1)))?;
        if !row.distance_to_shop_m.is_finite() || row.distance_to_shop_m < 0.0 {
            return Err(PipelineError::Data(format!("{source}: line {}: invalid distance_to_shop_m", i + 1)));
        }
        if row.distance_to_shop_m <= radius_m {
            consumers.push(row);
        } else {
            outside_radius += 1;
        }
    }
    let mut warnings = Vec::new();
    if consumers.is_empty() {
        let msg = format!("{source}: population is empty after reading and radius filtering");
        log::warn!("{msg}");
        warnings.push(msg);
    }
    Ok(IngestReport { consumers, outside_radius, warnings })
}

/// Writes the population in the one-record-per-line format.
pub fn write_population(path: &Path, consumers: &[ConsumerProfile]) -> Result<(), PipelineError> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(|e| PipelineError::Io(format!("{}: {e}", path.display())))?);
    for c in consumers {
        let line = serde_json::to_string(c).expect("profile serializes");
        writeln!(out, "{line}").map_err(|e| PipelineError::Io(e.to_string()))?;
    }
    out.flush().map_err(|e| PipelineError::Io(e.to_string()))
}
