//! Flat `key = value` run settings.
//!
//! Precedence, lowest first: built-in defaults, the `--config` file,
//! `--set key=value` flags, then named flags and their environment
//! variables.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;
use gan_event_core::eval::EvalConfig;
use gan_event_core::events::{cluster_label, Impulse, SynthCorpusConfig, SynthSalesConfig};
use gan_event_core::forecast::{FeatureMode, ForecastConfig};
use gan_event_core::gan::{EncoderConfig, GanConfig, ModelConfig};

/// A bad flag, key or value. Reported with exit code 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

#[derive(Debug, Clone)]
pub struct Settings {
    pub seed: u64,
    pub events: Option<PathBuf>,
    pub sales: Option<PathBuf>,
    pub category: String,

    pub corpus: SynthCorpusConfig,
    pub sales_synth: SynthSalesConfig,
    /// Clusters whose dominated days fire `impulse`.
    pub impact_clusters: Vec<usize>,
    pub impulse: Impulse,
    /// Extra impulses at random dates.
    pub n_planted: usize,
    pub planted: Impulse,

    pub gan: GanConfig,
    /// Encoder width; the event dimension when unset.
    pub hidden: Option<usize>,
    /// Feed-forward width; four times the encoder width when unset.
    pub ff_dim: Option<usize>,
    pub heads: usize,
    pub layers: usize,
    pub dropout: f64,

    pub embed_start: Option<NaiveDate>,
    pub embed_end: Option<NaiveDate>,

    pub forecast: ForecastConfig,
    /// Fine-tuning epochs for months after the first; 0 retrains from
    /// scratch every month.
    pub warm_start: usize,
    pub test_year: i32,
    pub models: Vec<FeatureMode>,

    pub eval: EvalConfig,
}

impl Default for Settings {
    fn default() -> Self {
        let n_days = 1461;
        Self {
            seed: 0,
            events: None,
            sales: None,
            category: "synthetic".into(),
            corpus: SynthCorpusConfig {
                n_days,
                events_per_day: (3, 8),
                theme_weights: vec![0.5, 1.0, 1.0, 1.0, 1.0],
                ..SynthCorpusConfig::default()
            },
            sales_synth: SynthSalesConfig {
                n_days,
                ..SynthSalesConfig::default()
            },
            impact_clusters: vec![0],
            impulse: Impulse {
                magnitude: 600.0,
                decay_days: 0,
            },
            n_planted: 0,
            planted: Impulse {
                magnitude: 300.0,
                decay_days: 0,
            },
            gan: GanConfig::default(),
            hidden: None,
            ff_dim: None,
            heads: 4,
            layers: 2,
            dropout: 0.1,
            embed_start: None,
            embed_end: None,
            forecast: ForecastConfig::default(),
            warm_start: 0,
            test_year: 2019,
            models: FeatureMode::ALL.to_vec(),
            eval: EvalConfig::default(),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> anyhow::Result<T>
where
    T::Err: fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| usage(format!("invalid value {value:?} for {key}: {e}")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> anyhow::Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse(key, s))
        .collect()
}

fn parse_opt<T: FromStr>(key: &str, value: &str) -> anyhow::Result<Option<T>>
where
    T::Err: fmt::Display,
{
    match value.trim() {
        "" | "none" => Ok(None),
        v => parse(key, v).map(Some),
    }
}

/// Every accepted key, for error messages and documentation.
#[rustfmt::skip]
pub const KEYS: &[&str] = &[
    "seed", "events", "sales", "category",
    "start", "n_days", "dim", "n_clusters", "events_min", "events_max", "theme_prob", "spread", "theme_weights",
    "base_level", "trend_slope", "weekly_amp", "yearly_amp", "noise_sd", "impact_clusters", "impulse_magnitude",
    "impulse_decay", "n_planted", "planted_magnitude",
    "gan_epochs", "gan_batch_size", "gan_learning_rate", "gan_weight_decay", "mask_fraction", "lambda_r",
    "lambda_d", "distance", "use_hausdorff", "saturating_g_loss", "hidden", "ff_dim", "heads", "layers",
    "dropout", "lag", "train_start", "train_end",
    "embed_start", "embed_end",
    "window", "input_chunk", "hidden_size", "forecast_dropout", "forecast_epochs", "forecast_learning_rate",
    "forecast_weight_decay", "forecast_batch_size", "chunk_stride", "patience", "validation_fraction",
    "warm_start", "test_year", "models",
    "ks", "period", "yearly_period", "signed_residuals", "n_resamples",
];

impl Settings {
    pub fn set(&mut self, key: &str, value: &str) -> anyhow::Result<()> {
        let v = value;
        match key {
            "seed" => self.seed = parse(key, v)?,
            "events" => self.events = Some(PathBuf::from(v.trim())),
            "sales" => self.sales = Some(PathBuf::from(v.trim())),
            "category" => self.category = v.trim().to_string(),

            "start" => {
                self.corpus.start = parse(key, v)?;
                self.sales_synth.start = self.corpus.start;
            }
            "n_days" => {
                self.corpus.n_days = parse(key, v)?;
                self.sales_synth.n_days = self.corpus.n_days;
            }
            "dim" => self.corpus.dim = parse(key, v)?,
            "n_clusters" => self.corpus.n_clusters = parse(key, v)?,
            "events_min" => self.corpus.events_per_day.0 = parse(key, v)?,
            "events_max" => self.corpus.events_per_day.1 = parse(key, v)?,
            "theme_prob" => self.corpus.theme_prob = parse(key, v)?,
            "spread" => self.corpus.spread = parse(key, v)?,
            "theme_weights" => self.corpus.theme_weights = parse_list(key, v)?,
            "base_level" => self.sales_synth.base_level = parse(key, v)?,
            "trend_slope" => self.sales_synth.trend_slope = parse(key, v)?,
            "weekly_amp" => self.sales_synth.weekly_amp = parse(key, v)?,
            "yearly_amp" => self.sales_synth.yearly_amp = parse(key, v)?,
            "noise_sd" => self.sales_synth.noise_sd = parse(key, v)?,
            "impact_clusters" => self.impact_clusters = parse_list(key, v)?,
            "impulse_magnitude" => self.impulse.magnitude = parse(key, v)?,
            "impulse_decay" => self.impulse.decay_days = parse(key, v)?,
            "n_planted" => self.n_planted = parse(key, v)?,
            "planted_magnitude" => self.planted.magnitude = parse(key, v)?,

            "gan_epochs" => self.gan.epochs = parse(key, v)?,
            "gan_batch_size" => self.gan.batch_size = parse(key, v)?,
            "gan_learning_rate" => self.gan.learning_rate = parse(key, v)?,
            "gan_weight_decay" => self.gan.weight_decay = parse(key, v)?,
            "mask_fraction" => self.gan.mask_fraction = parse(key, v)?,
            "lambda_r" => self.gan.lambda_r = parse(key, v)?,
            "lambda_d" => self.gan.lambda_d = parse(key, v)?,
            "distance" => self.gan.distance = parse(key, v)?,
            "use_hausdorff" => self.gan.use_hausdorff = parse(key, v)?,
            "saturating_g_loss" => self.gan.saturating_g_loss = parse(key, v)?,
            "hidden" => self.hidden = parse_opt(key, v)?,
            "ff_dim" => self.ff_dim = parse_opt(key, v)?,
            "heads" => self.heads = parse(key, v)?,
            "layers" => self.layers = parse(key, v)?,
            "dropout" => self.dropout = parse(key, v)?,
            "lag" => self.gan.lag = parse(key, v)?,
            "train_start" => self.gan.train_start = parse_opt(key, v)?,
            "train_end" => self.gan.train_end = parse_opt(key, v)?,

            "embed_start" => self.embed_start = parse_opt(key, v)?,
            "embed_end" => self.embed_end = parse_opt(key, v)?,

            "window" => self.forecast.window = parse(key, v)?,
            "input_chunk" => self.forecast.input_chunk = parse(key, v)?,
            "hidden_size" => self.forecast.hidden_size = parse(key, v)?,
            "forecast_dropout" => self.forecast.dropout = parse(key, v)?,
            "forecast_epochs" => self.forecast.epochs = parse(key, v)?,
            "forecast_learning_rate" => self.forecast.learning_rate = parse(key, v)?,
            "forecast_weight_decay" => self.forecast.weight_decay = parse(key, v)?,
            "forecast_batch_size" => self.forecast.batch_size = parse(key, v)?,
            "chunk_stride" => self.forecast.chunk_stride = parse(key, v)?,
            "patience" => self.forecast.patience = parse(key, v)?,
            "validation_fraction" => self.forecast.validation_fraction = parse(key, v)?,
            "warm_start" => self.warm_start = parse(key, v)?,
            "test_year" => self.test_year = parse(key, v)?,
            "models" => {
                let models: Vec<FeatureMode> = parse_list(key, v)?;
                if models.is_empty() {
                    return Err(usage("models must name at least one model"));
                }
                self.models = models;
            }

            "ks" => self.eval.ks = parse_list(key, v)?,
            "period" => self.eval.period = parse(key, v)?,
            "yearly_period" => self.eval.yearly_period = parse_opt(key, v)?,
            "signed_residuals" => self.eval.signed_residuals = parse(key, v)?,
            "n_resamples" => self.eval.n_resamples = parse(key, v)?,
            _ => {
                return Err(usage(format!(
                    "unknown setting {key:?}; known settings: {}",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Applies `KEY=VALUE` pairs as given on the command line.
    pub fn apply_pairs(&mut self, pairs: &[String]) -> anyhow::Result<()> {
        for p in pairs {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| usage(format!("expected KEY=VALUE, got {p:?}")))?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    /// Reads a settings file: one `key = value` per line, `#` comments.
    pub fn apply_file(&mut self, path: &Path) -> anyhow::Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config file {}: {e}", path.display())))?;
        self.apply_text(&text, &path.display().to_string())
    }

    pub fn apply_text(&mut self, text: &str, origin: &str) -> anyhow::Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| usage(format!("{origin}:{}: expected `key = value`", i + 1)))?;
            self.set(k.trim(), v)
                .map_err(|e| usage(format!("{origin}:{}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn corpus_config(&self) -> SynthCorpusConfig {
        SynthCorpusConfig {
            seed: self.seed,
            ..self.corpus.clone()
        }
    }

    pub fn sales_config(&self) -> SynthSalesConfig {
        let impact_map: BTreeMap<String, Impulse> = self
            .impact_clusters
            .iter()
            .map(|c| (cluster_label(*c), self.impulse))
            .collect();
        SynthSalesConfig {
            seed: self.seed,
            category: self.category.clone(),
            impact_map,
            ..self.sales_synth.clone()
        }
    }

    /// GAN settings for events of dimension `dim`.
    pub fn gan_config(&self, dim: usize) -> GanConfig {
        let hidden = self.hidden.unwrap_or(dim);
        GanConfig {
            model: ModelConfig {
                dim,
                encoder: EncoderConfig {
                    model_dim: hidden,
                    heads: self.heads,
                    ff_dim: self.ff_dim.unwrap_or(4 * hidden),
                    layers: self.layers,
                    dropout: self.dropout,
                },
            },
            seed: self.seed,
            ..self.gan.clone()
        }
    }

    pub fn forecast_config(&self, mode: FeatureMode) -> ForecastConfig {
        ForecastConfig {
            feature_mode: mode,
            seed: self.seed,
            ..self.forecast.clone()
        }
    }

    pub fn eval_config(&self) -> EvalConfig {
        EvalConfig {
            seed: self.seed,
            ..self.eval.clone()
        }
    }
}
