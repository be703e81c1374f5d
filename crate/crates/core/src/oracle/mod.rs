//! Revenue oracles: implementations of the set function `f(menu)` that every
//! optimizer maximizes.

mod neural;
pub mod rng;
mod simulator;
mod tabular;
mod weights;

pub use neural::{
    apply_gate, gated_target, neural_evaluate, neural_logit, neural_score, pair_embedding, pool_context, sigmoid,
    NeuralOracle,
};
pub use simulator::{choice_simulate, simulator_evaluate, Choice, ChoiceModelParams, SimulatorOracle};
pub use tabular::{LiftRow, TabularOracle};
pub use weights::{EncodingConfig, Layer, Matrix, ScorerWeights, Standardization, GATE_WIDTH, WEIGHTS_FORMAT_VERSION};

use thiserror::Error;

use crate::domain::{CampaignSet, ConsumerProfile, Money, ThresholdDiscountPair};
use crate::encoding::EncodingError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error("dimension mismatch at {layer}: expected {expected}, found {found}")]
    DimensionMismatch { layer: String, expected: usize, found: usize },
    #[error("non-finite activation in {layer}")]
    NonFinite { layer: String },
    #[error("weights file format version {found} is not supported (expected {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },
    #[error("invalid weights: {0}")]
    Weights(String),
    #[error("invalid lift table: {0}")]
    Table(String),
    #[error("invalid oracle parameters: {0}")]
    InvalidParams(String),
}

/// Value oracle for expected net revenue of a campaign menu.
///
/// Implementations must be deterministic: identical inputs give identical
/// outputs regardless of how many worker threads evaluate them.
pub trait RevenueOracle: Send + Sync {
    /// Identifier recorded in result files.
    fn name(&self) -> String;

    fn evaluate(&self, menu: &CampaignSet, population: &[ConsumerProfile]) -> Result<Money, OracleError>;

    /// Per-consumer score of one target pair shown alongside `menu_context`.
    fn evaluate_single(
        &self,
        target: &ThresholdDiscountPair,
        consumer: &ConsumerProfile,
        menu_context: &CampaignSet,
    ) -> Result<f64, OracleError>;
}

impl<T: RevenueOracle + ?Sized> RevenueOracle for &T {
    fn name(&self) -> String {
        (**self).name()
    }

    fn evaluate(&self, menu: &CampaignSet, population: &[ConsumerProfile]) -> Result<Money, OracleError> {
        (**self).evaluate(menu, population)
    }

    fn evaluate_single(
        &self,
        target: &ThresholdDiscountPair,
        consumer: &ConsumerProfile,
        menu_context: &CampaignSet,
    ) -> Result<f64, OracleError> {
        (**self).evaluate_single(target, consumer, menu_context)
    }
}
