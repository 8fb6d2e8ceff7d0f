use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::encoder::EncoderConfig;
use crate::error::{Error, Result};
use crate::numerics::PairDistance;

/// Distance between two event vectors in the set reconstruction loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceFn {
    /// `1 - cos(x, y)`
    Cosine,
    /// `sum_i |x_i - y_i|`
    L1,
    /// `sum_i (x_i - y_i)^2`
    L2,
}

impl DistanceFn {
    pub const ALL: [DistanceFn; 3] = [DistanceFn::Cosine, DistanceFn::L1, DistanceFn::L2];

    pub fn pair_distance(self) -> PairDistance {
        match self {
            DistanceFn::Cosine => PairDistance::Cosine,
            DistanceFn::L1 => PairDistance::L1,
            DistanceFn::L2 => PairDistance::SquaredL2,
        }
    }
}

impl fmt::Display for DistanceFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DistanceFn::Cosine => "cosine",
            DistanceFn::L1 => "l1",
            DistanceFn::L2 => "l2",
        })
    }
}

impl FromStr for DistanceFn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cosine" => Ok(DistanceFn::Cosine),
            "l1" => Ok(DistanceFn::L1),
            "l2" => Ok(DistanceFn::L2),
            other => Err(Error::Config(format!("unknown distance function {other:?}"))),
        }
    }
}

/// Architecture shared by generator and discriminator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Event embedding width `d`.
    pub dim: usize,
    pub encoder: EncoderConfig,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            dim: 100,
            encoder: EncoderConfig::default(),
        }
    }
}

impl ModelConfig {
    /// `d = h`, four heads, feed-forward width `4h`.
    pub fn for_dim(dim: usize) -> Self {
        Self {
            dim,
            encoder: EncoderConfig {
                model_dim: dim,
                ff_dim: 4 * dim,
                ..EncoderConfig::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GanConfig {
    pub model: ModelConfig,
    /// Fraction `k` of a day's events masked per training step.
    pub mask_fraction: f64,
    pub lambda_r: f64,
    pub lambda_d: f64,
    pub distance: DistanceFn,
    /// `false` trains on the position-wise cosine loss instead.
    pub use_hausdorff: bool,
    /// Minimise `log(1 - D(G(v)))` literally instead of `-log D(G(v))`.
    pub saturating_g_loss: bool,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    /// Days of look-back when assembling a day's event set.
    pub lag: u32,
    /// Only days in this inclusive range are used for training.
    pub train_start: Option<NaiveDate>,
    pub train_end: Option<NaiveDate>,
    pub seed: u64,
}

impl Default for GanConfig {
    fn default() -> Self {
        Self {
            model: ModelConfig::default(),
            mask_fraction: 0.25,
            lambda_r: 10.0,
            lambda_d: 1.0,
            distance: DistanceFn::Cosine,
            use_hausdorff: true,
            saturating_g_loss: false,
            epochs: 100,
            batch_size: 32,
            learning_rate: 1e-4,
            weight_decay: 1e-3,
            lag: 1,
            train_start: None,
            train_end: None,
            seed: 0,
        }
    }
}

impl GanConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.mask_fraction > 0.0 && self.mask_fraction < 1.0) {
            return bad(format!("mask_fraction must be in (0, 1), got {}", self.mask_fraction));
        }
        if !(self.lambda_r >= 0.0 && self.lambda_d >= 0.0) {
            return bad("lambda_r and lambda_d must be >= 0".into());
        }
        if self.lambda_r == 0.0 && self.lambda_d == 0.0 {
            return bad("lambda_r and lambda_d cannot both be 0".into());
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive".into());
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 || self.weight_decay < 0.0 {
            return bad("learning_rate must be > 0 and weight_decay >= 0".into());
        }
        if self.model.dim < 1 {
            return bad("dim must be positive".into());
        }
        self.model.encoder.validate()
    }
}
