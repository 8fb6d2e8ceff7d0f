//! Joint adversarial training of generator and discriminator.

use chrono::{Days, NaiveDate};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::config::GanConfig;
use super::loss::{adversarial_losses, mask_indices, reconstruction_term};
use super::models::{Discriminator, Generator};
use crate::error::{contract, Result};
use crate::events::{Event, EventCalendar};
use crate::numerics::{AdamW, AdamWConfig, Graph, ParamSet, Tensor, Var};
use crate::rng::{self, Rng};

/// One day's event set as an `n x d` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingDay {
    pub date: NaiveDate,
    pub events: Tensor,
}

pub fn event_matrix(events: &[&Event]) -> Result<Tensor> {
    let rows: Vec<&[f64]> = events.iter().map(|e| e.embedding.as_slice()).collect();
    Tensor::from_rows(&rows)
}

/// Days in the calendar span (optionally clipped to `[start, end]`) whose
/// event set has at least two events.
pub fn training_days(
    calendar: &EventCalendar,
    lag: u32,
    start: Option<NaiveDate>,
    end: Option<NaiveDate>,
) -> Result<Vec<TrainingDay>> {
    let (Some(first), Some(last)) = (calendar.first_date(), calendar.last_date()) else {
        return Ok(Vec::new());
    };
    let from = start.map_or(first, |s| s.max(first));
    let to = end.map_or(last + Days::new(u64::from(lag)), |e| {
        e.min(last + Days::new(u64::from(lag)))
    });
    let mut out = Vec::new();
    let mut d = from;
    while d <= to {
        let evs = calendar.day_event_set_with_lag(d, lag);
        if evs.len() >= 2 {
            out.push(TrainingDay {
                date: d,
                events: event_matrix(&evs)?,
            });
        }
        d = d + Days::new(1);
    }
    Ok(out)
}

/// Mean losses of one epoch. Terms that were switched off are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub d_loss: Option<f64>,
    pub g_adv: Option<f64>,
    pub rec: Option<f64>,
    pub g_total: f64,
}

#[derive(Debug, Clone)]
pub struct GanTrainer {
    pub config: GanConfig,
    pub generator: Generator,
    pub discriminator: Discriminator,
    opt_g: AdamW,
    opt_d: AdamW,
    epoch: usize,
}

struct DayDraw<'a> {
    day: &'a TrainingDay,
    masked: Vec<usize>,
}

impl GanTrainer {
    pub fn new(config: GanConfig) -> Result<Self> {
        config.validate()?;
        let generator = Generator::new(config.model, &mut rng::stream(config.seed, "gan/generator-init"))?;
        let discriminator = Discriminator::new(config.model, &mut rng::stream(config.seed, "gan/discriminator-init"))?;
        let opt = AdamWConfig::with_lr(config.learning_rate, config.weight_decay);
        Ok(Self {
            opt_g: AdamW::new(opt, &generator.params),
            opt_d: AdamW::new(opt, &discriminator.params),
            generator,
            discriminator,
            config,
            epoch: 0,
        })
    }

    pub fn epochs_done(&self) -> usize {
        self.epoch
    }

    /// Shuffled batches of equal-size days, at most `batch_size` each.
    fn batches<'a>(&self, days: &'a [TrainingDay], rng: &mut Rng) -> Vec<Vec<&'a TrainingDay>> {
        let mut order: Vec<&TrainingDay> = days.iter().collect();
        order.shuffle(rng);
        order.sort_by_key(|d| d.events.rows());
        let mut batches: Vec<Vec<&TrainingDay>> = Vec::new();
        for d in order {
            match batches.last_mut() {
                Some(b) if b.len() < self.config.batch_size && b[0].events.rows() == d.events.rows() => b.push(d),
                _ => batches.push(vec![d]),
            }
        }
        batches.shuffle(rng);
        batches
    }

    /// Runs one pass over `days`. Masks, batch order and dropout are drawn
    /// from a stream keyed by the epoch index, so a resumed trainer repeats
    /// an uninterrupted run exactly.
    pub fn run_epoch(&mut self, days: &[TrainingDay]) -> Result<EpochLog> {
        if days.is_empty() {
            return Err(contract("no trainable days (need at least one day with >= 2 events)"));
        }
        let cfg = self.config.clone();
        let mut rng = rng::indexed_stream(cfg.seed, "gan/epoch", self.epoch as u64);
        let batches = self.batches(days, &mut rng);
        let (mut d_sum, mut adv_sum, mut rec_sum, mut tot_sum) = (0.0, 0.0, 0.0, 0.0);
        let mut n_days = 0usize;
        for batch in batches {
            let draws: Vec<DayDraw> = batch
                .into_iter()
                .map(|day| DayDraw {
                    masked: mask_indices(day.events.rows(), cfg.mask_fraction, &mut rng),
                    day,
                })
                .collect();
            let bn = draws.len() as f64;
            if cfg.lambda_d > 0.0 {
                d_sum += self.discriminator_step(&draws, &mut rng)? * bn;
            }
            let (total, adv, rec) = self.generator_step(&draws, &mut rng)?;
            tot_sum += total * bn;
            adv_sum += adv * bn;
            rec_sum += rec * bn;
            n_days += draws.len();
        }
        let n = n_days as f64;
        let log = EpochLog {
            epoch: self.epoch,
            d_loss: (cfg.lambda_d > 0.0).then_some(d_sum / n),
            g_adv: (cfg.lambda_d > 0.0).then_some(adv_sum / n),
            rec: (cfg.lambda_r > 0.0).then_some(rec_sum / n),
            g_total: tot_sum / n,
        };
        self.epoch += 1;
        Ok(log)
    }

    fn generated_day(
        &self,
        g: &mut Graph,
        gp: &crate::numerics::Bound,
        v: Var,
        masked: &[usize],
        rng: &mut Rng,
    ) -> Result<(Var, Var)> {
        let (_, v_hat) = self.generator.forward_masked(g, gp, v, masked, Some(rng))?;
        let v_gen = g.scatter_rows(v, v_hat, masked)?;
        Ok((v_hat, v_gen))
    }

    fn discriminator_step(&mut self, draws: &[DayDraw], rng: &mut Rng) -> Result<f64> {
        let mut g = Graph::new();
        let gp = g.bind(&self.generator.params, false);
        let dp = g.bind(&self.discriminator.params, true);
        let mut losses = Vec::with_capacity(draws.len());
        for dd in draws {
            let v = g.constant(dd.day.events.clone());
            let (_, v_gen) = self.generated_day(&mut g, &gp, v, &dd.masked, rng)?;
            let zr = self.discriminator.logit(&mut g, &dp, v, Some(rng))?;
            let zg = self.discriminator.logit(&mut g, &dp, v_gen, Some(rng))?;
            let (d_loss, _) = adversarial_losses(&mut g, zr, zg, self.config.saturating_g_loss)?;
            losses.push(d_loss);
        }
        let all = g.concat_rows(&losses)?;
        let loss = g.mean(all);
        let value = g.scalar(loss);
        let grads = g.backward(loss)?.collect(&dp, &self.discriminator.params);
        self.opt_d.step(&mut self.discriminator.params, &grads)?;
        Ok(value)
    }

    /// Returns the mean `(total, adversarial, reconstruction)` terms.
    fn generator_step(&mut self, draws: &[DayDraw], rng: &mut Rng) -> Result<(f64, f64, f64)> {
        let cfg = &self.config;
        let mut g = Graph::new();
        let gp = g.bind(&self.generator.params, true);
        let dp = (cfg.lambda_d > 0.0).then(|| g.bind(&self.discriminator.params, false));
        let (mut totals, mut advs, mut recs) = (Vec::new(), Vec::new(), Vec::new());
        for dd in draws {
            let v = g.constant(dd.day.events.clone());
            let (v_hat, v_gen) = self.generated_day(&mut g, &gp, v, &dd.masked, rng)?;
            let mut terms = Vec::new();
            if cfg.lambda_r > 0.0 {
                let rec = reconstruction_term(&mut g, v, v_hat, &dd.masked, cfg.use_hausdorff, cfg.distance)?;
                recs.push(rec);
                terms.push(g.scale(rec, cfg.lambda_r));
            }
            if let Some(dp) = &dp {
                let zr = self.discriminator.logit(&mut g, dp, v, Some(rng))?;
                let zg = self.discriminator.logit(&mut g, dp, v_gen, Some(rng))?;
                let (_, g_adv) = adversarial_losses(&mut g, zr, zg, cfg.saturating_g_loss)?;
                advs.push(g_adv);
                terms.push(g.scale(g_adv, cfg.lambda_d));
            }
            let t = if terms.len() == 2 {
                g.add(terms[0], terms[1])?
            } else {
                terms[0]
            };
            totals.push(t);
        }
        let mean_of = |g: &mut Graph, xs: &[Var]| -> Result<f64> {
            if xs.is_empty() {
                return Ok(0.0);
            }
            Ok(xs.iter().map(|x| g.scalar(*x)).sum::<f64>() / xs.len() as f64)
        };
        let adv = mean_of(&mut g, &advs)?;
        let rec = mean_of(&mut g, &recs)?;
        let all = g.concat_rows(&totals)?;
        let loss = g.mean(all);
        let total = g.scalar(loss);
        let grads = g.backward(loss)?.collect(&gp, &self.generator.params);
        self.opt_g.step(&mut self.generator.params, &grads)?;
        Ok((total, adv, rec))
    }

    /// Everything needed to resume: both models, both optimizers, epoch.
    pub fn export_state(&self) -> ParamSet {
        let mut s = ParamSet::new();
        s.add("trainer.epoch", Tensor::scalar(self.epoch as f64));
        for (n, t) in self.generator.params.iter().chain(self.discriminator.params.iter()) {
            s.add(n, t.clone());
        }
        for (prefix, opt, params) in [
            ("opt_g", &self.opt_g, &self.generator.params),
            ("opt_d", &self.opt_d, &self.discriminator.params),
        ] {
            for (n, t) in opt.export(params).iter() {
                s.add(format!("{prefix}.{n}"), t.clone());
            }
        }
        s
    }

    pub fn from_state(config: GanConfig, state: &ParamSet) -> Result<Self> {
        let mut me = Self::new(config)?;
        let pick = |names: &[String], prefix: &str| -> Result<ParamSet> {
            let mut out = ParamSet::new();
            for n in names {
                let key = format!("{prefix}{n}");
                let id = state
                    .find(&key)
                    .ok_or_else(|| contract(format!("training state lacks {key}")))?;
                out.add(n.clone(), state[id].clone());
            }
            Ok(out)
        };
        me.generator.params.load_from(&pick(me.generator.params.names(), "")?)?;
        me.discriminator
            .params
            .load_from(&pick(me.discriminator.params.names(), "")?)?;
        let opt_state = |prefix: &str| -> ParamSet {
            let mut out = ParamSet::new();
            for (n, t) in state.iter() {
                if let Some(rest) = n.strip_prefix(prefix) {
                    out.add(rest, t.clone());
                }
            }
            out
        };
        let oc = AdamWConfig::with_lr(me.config.learning_rate, me.config.weight_decay);
        me.opt_g = AdamW::import(oc, &me.generator.params, &opt_state("opt_g."))?;
        me.opt_d = AdamW::import(oc, &me.discriminator.params, &opt_state("opt_d."))?;
        me.epoch = state
            .find("trainer.epoch")
            .map(|id| state[id].item() as usize)
            .ok_or_else(|| contract("training state lacks trainer.epoch"))?;
        Ok(me)
    }
}

/// Result of [`train_gan`].
#[derive(Debug, Clone)]
pub struct GanRun {
    pub generator: Generator,
    pub discriminator: Discriminator,
    pub log: Vec<EpochLog>,
}

/// Trains for `cfg.epochs` epochs over the calendar's trainable days.
pub fn train_gan(calendar: &EventCalendar, cfg: &GanConfig) -> Result<GanRun> {
    cfg.validate()?;
    if calendar.dim() != cfg.model.dim {
        return Err(crate::error::dim_err(
            "train_gan",
            format!("corpus dim {} vs model dim {}", calendar.dim(), cfg.model.dim),
        ));
    }
    let days = training_days(calendar, cfg.lag, cfg.train_start, cfg.train_end)?;
    if days.is_empty() {
        return Err(contract("no trainable days (need at least one day with >= 2 events)"));
    }
    let mut trainer = GanTrainer::new(cfg.clone())?;
    let mut log = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        log.push(trainer.run_epoch(&days)?);
    }
    Ok(GanRun {
        generator: trainer.generator,
        discriminator: trainer.discriminator,
        log,
    })
}
