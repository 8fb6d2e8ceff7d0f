use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::config::ForecastConfig;
use super::lstm::Lstm;
use crate::error::{contract, Result};
use crate::numerics::{AdamW, AdamWConfig, Graph, ParamSet, Tensor};
use crate::rng;

/// Input row for step `tau`: yesterday's scaled sales next to today's
/// event features.
fn step_input(rows: &[Vec<f64>], tau: usize) -> Vec<f64> {
    let mut x = Vec::with_capacity(rows[tau].len());
    x.push(rows[tau - 1][0]);
    x.extend_from_slice(&rows[tau][1..]);
    x
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs_run: usize,
    pub best_epoch: Option<usize>,
    pub train_loss: Vec<f64>,
    pub val_loss: Vec<f64>,
}

/// An LSTM with its optimizer state.
#[derive(Debug, Clone)]
pub struct Forecaster {
    pub config: ForecastConfig,
    pub lstm: Lstm,
    opt: AdamW,
    epochs_trained: usize,
}

impl Forecaster {
    pub fn new(input_dim: usize, config: ForecastConfig) -> Result<Self> {
        config.validate()?;
        let lstm = Lstm::new(
            input_dim,
            config.hidden_size,
            &mut rng::stream(config.seed, "forecast/init"),
        );
        let opt = AdamW::new(
            AdamWConfig::with_lr(config.learning_rate, config.weight_decay),
            &lstm.params,
        );
        Ok(Self {
            config,
            lstm,
            opt,
            epochs_trained: 0,
        })
    }

    pub fn epochs_trained(&self) -> usize {
        self.epochs_trained
    }

    /// Trains on feature rows `[scaled S_t ‖ e_t]` for up to `epochs`
    /// epochs. The trailing validation share drives early stopping and the
    /// best parameters are restored at the end.
    pub fn fit(&mut self, rows: &[Vec<f64>], epochs: usize) -> Result<TrainReport> {
        let cfg = self.config.clone();
        let t = rows.len();
        if t < cfg.input_chunk + cfg.window {
            return Err(contract(format!(
                "insufficient history: {t} days, need input_chunk + window = {}",
                cfg.input_chunk + cfg.window
            )));
        }
        if rows.iter().any(|r| r.len() != self.lstm.input_dim()) {
            return Err(contract("feature row width does not match the model"));
        }
        let val_len = (t as f64 * cfg.validation_fraction).floor() as usize;
        let val_start = t - val_len;
        let len = cfg.input_chunk.min(val_start.saturating_sub(1));
        if len == 0 {
            return Err(contract("validation split leaves no training steps"));
        }
        let mut starts: Vec<usize> = (1..=val_start - len).step_by(cfg.stride()).collect();
        if starts.last() != Some(&(val_start - len)) {
            starts.push(val_start - len);
        }

        let mut report = TrainReport::default();
        let mut best: Option<(f64, ParamSet)> = None;
        let mut stale = 0;
        for _ in 0..epochs {
            let mut r = rng::indexed_stream(cfg.seed, "forecast/epoch", self.epochs_trained as u64);
            starts.shuffle(&mut r);
            let mut total = 0.0;
            for batch in starts.chunks(cfg.batch_size) {
                let b = batch.len();
                let inputs: Vec<Tensor> = (0..len)
                    .map(|k| {
                        let data = batch.iter().flat_map(|s| step_input(rows, s + k)).collect();
                        Tensor::new(vec![b, self.lstm.input_dim()], data)
                    })
                    .collect::<Result<_>>()?;
                let targets: Vec<Vec<f64>> = (0..len)
                    .map(|k| batch.iter().map(|s| rows[s + k][0]).collect())
                    .collect();
                let mut g = Graph::new();
                let p = g.bind(&self.lstm.params, true);
                let loss = self
                    .lstm
                    .sequence_loss(&mut g, &p, &inputs, &targets, cfg.dropout, Some(&mut r))?;
                g.check_finite()?;
                total += g.scalar(loss) * b as f64;
                let grads = g.backward(loss)?.collect(&p, &self.lstm.params);
                self.opt.step(&mut self.lstm.params, &grads)?;
            }
            report.train_loss.push(total / starts.len() as f64);
            self.epochs_trained += 1;
            report.epochs_run += 1;
            if val_len == 0 {
                continue;
            }
            let val = self.validation_loss(rows, val_start)?;
            report.val_loss.push(val);
            if best.as_ref().is_none_or(|(b, _)| val < *b) {
                best = Some((val, self.lstm.params.clone()));
                report.best_epoch = Some(report.epochs_run - 1);
                stale = 0;
            } else {
                stale += 1;
                if stale >= cfg.patience {
                    break;
                }
            }
        }
        if let Some((_, params)) = best {
            self.lstm.params.load_from(&params)?;
        }
        Ok(report)
    }

    /// Teacher-forced MSE on steps `val_start..`, warmed up on the
    /// preceding `input_chunk` days.
    fn validation_loss(&self, rows: &[Vec<f64>], val_start: usize) -> Result<f64> {
        let from = val_start.saturating_sub(self.config.input_chunk).max(1);
        let mut st = self.lstm.zero_state();
        let (mut sum, mut n) = (0.0, 0usize);
        for tau in from..rows.len() {
            let y = self.lstm.step(&mut st, &step_input(rows, tau))?;
            if tau >= val_start {
                sum += (y - rows[tau][0]).powi(2);
                n += 1;
            }
        }
        Ok(sum / n as f64)
    }

    /// Autoregressive rollout in scaled space. The state is warmed up over
    /// all of `history`; each later step feeds back the previous prediction,
    /// clamped from below at `floor`, next to that day's event features.
    pub fn predict_scaled(&self, history: &[Vec<f64>], future_events: &[Vec<f64>], floor: f64) -> Result<Vec<f64>> {
        if history.len() < self.config.input_chunk.max(1) {
            return Err(contract(format!(
                "prediction needs at least {} days of history, got {}",
                self.config.input_chunk,
                history.len()
            )));
        }
        let mut st = self.lstm.zero_state();
        for tau in 1..history.len() {
            self.lstm.step(&mut st, &step_input(history, tau))?;
        }
        let mut prev = history[history.len() - 1][0];
        let mut out = Vec::with_capacity(future_events.len());
        for ev in future_events {
            let mut x = Vec::with_capacity(1 + ev.len());
            x.push(prev);
            x.extend_from_slice(ev);
            let y = self.lstm.step(&mut st, &x)?.max(floor);
            out.push(y);
            prev = y;
        }
        Ok(out)
    }
}

/// Builds and fits a fresh model on `rows` for `config.epochs` epochs.
pub fn train_forecaster(rows: &[Vec<f64>], config: &ForecastConfig) -> Result<(Forecaster, TrainReport)> {
    let width = rows.first().map_or(1, Vec::len);
    let mut f = Forecaster::new(width, config.clone())?;
    let report = f.fit(rows, config.epochs)?;
    Ok((f, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> ForecastConfig {
        ForecastConfig {
            window: 5,
            input_chunk: 20,
            hidden_size: 6,
            dropout: 0.0,
            epochs: 3,
            batch_size: 4,
            ..ForecastConfig::default()
        }
    }

    fn rows(n: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|t| vec![0.5 + 0.4 * (t as f64 * 0.9).sin(), (t % 7) as f64 / 7.0])
            .collect()
    }

    #[test]
    fn rejects_short_history() {
        let err = train_forecaster(&rows(24), &small_cfg()).unwrap_err();
        assert!(err.to_string().contains("insufficient history"));
        assert!(train_forecaster(&rows(25), &small_cfg()).is_ok());
    }

    #[test]
    fn rollout_chains_one_step_calls() {
        let (f, _) = train_forecaster(&rows(80), &small_cfg()).unwrap();
        let all = rows(90);
        let hist = &all[..60];
        let fut: Vec<Vec<f64>> = all[60..70].iter().map(|r| r[1..].to_vec()).collect();
        let joint = f.predict_scaled(hist, &fut, 0.0).unwrap();
        let mut h = hist.to_vec();
        for (w, ev) in fut.iter().enumerate() {
            let one = f.predict_scaled(&h, std::slice::from_ref(ev), 0.0).unwrap();
            assert_eq!(one[0], joint[w]);
            let mut row = vec![one[0]];
            row.extend_from_slice(ev);
            h.push(row);
        }
    }

    #[test]
    fn predictions_respect_floor_and_history_bound() {
        let (f, _) = train_forecaster(&rows(80), &small_cfg()).unwrap();
        let all = rows(80);
        let fut = vec![vec![0.0]; 5];
        let p = f.predict_scaled(&all[..40], &fut, 10.0).unwrap();
        assert!(p.iter().all(|v| *v == 10.0));
        assert!(f.predict_scaled(&all[..10], &fut, 0.0).is_err());
    }

    #[test]
    fn training_reduces_loss_and_is_deterministic() {
        let cfg = ForecastConfig {
            epochs: 30,
            learning_rate: 1e-2,
            ..small_cfg()
        };
        let (a, ra) = train_forecaster(&rows(150), &cfg).unwrap();
        let (b, rb) = train_forecaster(&rows(150), &cfg).unwrap();
        assert_eq!(a.lstm.params, b.lstm.params);
        assert_eq!(ra, rb);
        assert!(ra.train_loss.last().unwrap() < &ra.train_loss[0]);
    }
}
