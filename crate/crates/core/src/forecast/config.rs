use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// What accompanies the sales value in each LSTM input row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMode {
    SalesOnly,
    /// Leave-one-out generator day embedding.
    GanEvent,
    /// Plain average of the day's event vectors.
    MeanPoolEvent,
    /// Average weighted by each event's link count.
    WeightedPoolEvent,
}

impl FeatureMode {
    pub const ALL: [FeatureMode; 4] = [
        FeatureMode::SalesOnly,
        FeatureMode::GanEvent,
        FeatureMode::MeanPoolEvent,
        FeatureMode::WeightedPoolEvent,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureMode::SalesOnly => "sales_only",
            FeatureMode::GanEvent => "gan_event",
            FeatureMode::MeanPoolEvent => "mean_pool_event",
            FeatureMode::WeightedPoolEvent => "weighted_pool_event",
        }
    }
}

impl fmt::Display for FeatureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeatureMode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown feature mode {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastConfig {
    /// Days predicted per window (`W`).
    pub window: usize,
    /// Training chunk length and minimum prediction history (`N`).
    pub input_chunk: usize,
    pub hidden_size: usize,
    pub dropout: f64,
    pub feature_mode: FeatureMode,
    pub epochs: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    /// Chunks per optimizer step.
    pub batch_size: usize,
    /// Offset between consecutive training chunks; 0 means `input_chunk / 4`.
    pub chunk_stride: usize,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    /// Trailing share of the training span held out for early stopping.
    pub validation_fraction: f64,
    pub seed: u64,
}

impl Default for ForecastConfig {
    fn default() -> Self {
        Self {
            window: 30,
            input_chunk: 365,
            hidden_size: 404,
            dropout: 0.3,
            feature_mode: FeatureMode::GanEvent,
            epochs: 100,
            learning_rate: 1e-3,
            weight_decay: 1e-3,
            batch_size: 32,
            chunk_stride: 0,
            patience: 10,
            validation_fraction: 0.2,
            seed: 0,
        }
    }
}

impl ForecastConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.window < 1 {
            return bad("window must be >= 1");
        }
        if self.input_chunk < self.window {
            return bad("input_chunk must be >= window");
        }
        if self.hidden_size == 0 || self.batch_size == 0 {
            return bad("hidden_size and batch_size must be positive");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout must lie in [0, 1)");
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 || self.weight_decay < 0.0 {
            return bad("learning_rate must be > 0 and weight_decay >= 0");
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return bad("validation_fraction must lie in [0, 1)");
        }
        Ok(())
    }

    pub fn stride(&self) -> usize {
        if self.chunk_stride == 0 {
            (self.input_chunk / 4).max(1)
        } else {
            self.chunk_stride
        }
    }
}
