//! One function per subcommand.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use chrono::{Days, NaiveDate};
use gan_event_core::embedding::{embed_range, load_embeddings, save_embeddings};
use gan_event_core::eval::{evaluate_runs, rolling_monthly_eval, stl_decompose, LstmPredictor, ModelRun, MonthWindow};
use gan_event_core::events::{
    load_events, random_days, read_date_column, save_events, synth_corpus, synth_sales, write_date_column,
    EventCalendar,
};
use gan_event_core::forecast::{EventSource, FeatureMode, ForecastConfig, TrainReport};
use gan_event_core::gan::{training_days, EpochLog, GanConfig, GanTrainer, Generator};
use gan_event_core::numerics::checkpoint;
use gan_event_core::{rng, SalesSeries};
use serde::{Deserialize, Serialize};

use crate::outdir::OutDir;
use crate::settings::{usage, Settings};
use crate::svg;

pub const EVENTS: &str = "events.jsonl";
pub const SALES: &str = "sales.csv";
pub const IMPULSES: &str = "impulses.csv";
pub const GENERATOR: &str = "generator.ckpt";
pub const DISCRIMINATOR: &str = "discriminator.ckpt";
pub const GAN_STATE: &str = "gan_state.ckpt";
pub const GAN_LOSSES: &str = "gan_losses.csv";
pub const GAN_SIDECAR: &str = "gan.json";
pub const EMBEDDINGS: &str = "embeddings.csv";
pub const REPORT: &str = "report.csv";

pub fn predictions_file(model: FeatureMode) -> String {
    format!("predictions_{}.csv", model.name())
}

fn events_path(s: &Settings, out: &OutDir) -> PathBuf {
    s.events.clone().unwrap_or_else(|| out.path(EVENTS))
}

fn sales_path(s: &Settings, out: &OutDir) -> PathBuf {
    s.sales.clone().unwrap_or_else(|| out.path(SALES))
}

fn read_calendar(s: &Settings, out: &OutDir) -> Result<EventCalendar> {
    let path = out.require(events_path(s, out), "synth")?;
    let loaded = load_events(&path, None).with_context(|| format!("reading {}", path.display()))?;
    if !loaded.rejections.is_empty() {
        eprintln!("{}: {} events rejected", path.display(), loaded.rejections.len());
        for r in loaded.rejections.iter().take(5) {
            eprintln!("  line {} ({}): {}", r.line, r.id, r.reason);
        }
    }
    Ok(loaded.calendar)
}

fn read_sales(s: &Settings, out: &OutDir) -> Result<SalesSeries> {
    let path = out.require(sales_path(s, out), "synth")?;
    SalesSeries::from_csv(&path, s.category.clone()).with_context(|| format!("reading {}", path.display()))
}

#[derive(Serialize)]
struct SynthSidecar {
    corpus: gan_event_core::events::SynthCorpusConfig,
    sales: gan_event_core::events::SynthSalesConfig,
    n_events: usize,
    n_trigger_days: usize,
}

pub fn synth(s: &Settings, out: &OutDir) -> Result<()> {
    if s.corpus.n_days == 0 {
        return Err(usage("n_days must be at least 1"));
    }
    let corpus_cfg = s.corpus_config();
    let mut sales_cfg = s.sales_config();
    if s.n_planted > 0 {
        sales_cfg.planted = random_days(s.seed, sales_cfg.start, sales_cfg.n_days, s.n_planted)
            .into_iter()
            .map(|d| (d, s.planted))
            .collect();
    }
    let corpus = synth_corpus(&corpus_cfg)?;
    let sales = synth_sales(&sales_cfg, &corpus.calendar)?;
    save_events(&corpus.calendar, &out.path(EVENTS))?;
    sales.series.to_csv(&out.path(SALES))?;
    sales.impulses_to_csv(&out.path(IMPULSES))?;
    out.write_json(
        "synth.json",
        &SynthSidecar {
            corpus: corpus_cfg,
            sales: sales_cfg,
            n_events: corpus.calendar.len(),
            n_trigger_days: sales.trigger_days.len(),
        },
    )?;
    println!(
        "synth: {} events, {} sales days, {} impulse days -> {}",
        corpus.calendar.len(),
        sales.series.len(),
        sales.trigger_days.len(),
        out.path("").display()
    );
    Ok(())
}

#[derive(Serialize, Deserialize)]
pub struct GanSidecar {
    pub config: GanConfig,
    pub epochs_done: usize,
    pub training_days: usize,
    pub final_losses: Option<EpochLog>,
}

fn losses_csv(log: &[EpochLog]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for l in log {
        w.serialize(l)?;
    }
    Ok(w.into_inner()?)
}

fn read_losses(path: &std::path::Path) -> Result<Vec<EpochLog>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|x| x.map_err(Into::into)).collect()
}

pub fn train_gan(s: &Settings, out: &OutDir, resume: bool) -> Result<()> {
    let calendar = read_calendar(s, out)?;
    if calendar.is_empty() {
        bail!("the event file holds no valid events");
    }
    let cfg = s.gan_config(calendar.dim());
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let days = training_days(&calendar, cfg.lag, cfg.train_start, cfg.train_end)?;
    if days.is_empty() {
        bail!("no trainable days: no day in the training range has at least two events");
    }
    let (mut trainer, mut log) = if resume {
        let state = checkpoint::load(&out.require(out.path(GAN_STATE), "train-gan")?)?;
        let side: GanSidecar =
            serde_json::from_slice(&std::fs::read(out.require(out.path(GAN_SIDECAR), "train-gan")?)?)?;
        let same_run = GanConfig {
            epochs: cfg.epochs,
            ..side.config.clone()
        } == cfg;
        if !same_run {
            return Err(usage(
                "settings differ from the checkpointed run (only the epoch count may change on resume)",
            ));
        }
        let trainer = GanTrainer::from_state(cfg.clone(), &state)?;
        let mut log = read_losses(&out.require(out.path(GAN_LOSSES), "train-gan")?)?;
        log.truncate(trainer.epochs_done());
        (trainer, log)
    } else {
        (GanTrainer::new(cfg.clone())?, Vec::new())
    };
    if trainer.epochs_done() >= cfg.epochs {
        return Err(usage(format!(
            "checkpoint already has {} epochs; raise gan_epochs to continue",
            trainer.epochs_done()
        )));
    }
    while trainer.epochs_done() < cfg.epochs {
        let l = trainer.run_epoch(&days)?;
        eprintln!(
            "epoch {:>4}  g_total {:.5}  rec {}  d_loss {}",
            l.epoch + 1,
            l.g_total,
            l.rec.map_or("-".into(), |v| format!("{v:.5}")),
            l.d_loss.map_or("-".into(), |v| format!("{v:.5}"))
        );
        log.push(l);
    }
    checkpoint::save(&trainer.generator.params, &out.path(GENERATOR))?;
    checkpoint::save(&trainer.discriminator.params, &out.path(DISCRIMINATOR))?;
    checkpoint::save(&trainer.export_state(), &out.path(GAN_STATE))?;
    out.write(GAN_LOSSES, &losses_csv(&log)?)?;
    out.write_json(
        GAN_SIDECAR,
        &GanSidecar {
            config: cfg,
            epochs_done: trainer.epochs_done(),
            training_days: days.len(),
            final_losses: log.last().cloned(),
        },
    )?;
    println!("train-gan: {} epochs over {} days", trainer.epochs_done(), days.len());
    Ok(())
}

fn load_generator(out: &OutDir) -> Result<(Generator, GanConfig)> {
    let side: GanSidecar = serde_json::from_slice(&std::fs::read(out.require(out.path(GAN_SIDECAR), "train-gan")?)?)?;
    let params = checkpoint::load(&out.require(out.path(GENERATOR), "train-gan")?)?;
    let mut gen = Generator::new(
        side.config.model,
        &mut rng::stream(side.config.seed, "cli/generator-shell"),
    )?;
    gen.params.load_from(&params)?;
    Ok((gen, side.config))
}

#[derive(Serialize)]
struct EmbedSidecar {
    start: NaiveDate,
    end: NaiveDate,
    lag: u32,
    days: usize,
    days_with_events: usize,
}

pub fn embed_days(s: &Settings, out: &OutDir) -> Result<()> {
    let calendar = read_calendar(s, out)?;
    let (gen, cfg) = load_generator(out)?;
    let sales = sales_path(s, out);
    let (default_start, default_end) = if sales.is_file() {
        let series = read_sales(s, out)?;
        (series.start(), series.end())
    } else {
        match (calendar.first_date(), calendar.last_date()) {
            (Some(a), Some(b)) => (a, b + Days::new(u64::from(cfg.lag))),
            _ => bail!("the event file holds no valid events"),
        }
    };
    let start = s.embed_start.unwrap_or(default_start);
    let end = s.embed_end.unwrap_or(default_end);
    if end < start {
        return Err(usage(format!("embed_end {end} precedes embed_start {start}")));
    }
    let embs = embed_range(&gen, &calendar, start, end, cfg.lag)?;
    save_embeddings(&embs, &out.path(EMBEDDINGS))?;
    out.write_json(
        "embeddings.json",
        &EmbedSidecar {
            start,
            end,
            lag: cfg.lag,
            days: embs.len(),
            days_with_events: embs.iter().filter(|e| e.n_events > 0).count(),
        },
    )?;
    println!("embed-days: {} days {start}..={end}", embs.len());
    Ok(())
}

#[derive(Serialize)]
struct ModelSidecar {
    model: String,
    config: ForecastConfig,
    windows: Vec<MonthWindow>,
    reports: Vec<(u32, TrainReport)>,
}

#[derive(Serialize)]
struct ForecastSidecar {
    test_year: i32,
    warm_start: usize,
    models: Vec<ModelSidecar>,
}

pub fn forecast(s: &Settings, out: &OutDir) -> Result<()> {
    let series = read_sales(s, out)?;
    let needs_calendar = s
        .models
        .iter()
        .any(|m| matches!(m, FeatureMode::MeanPoolEvent | FeatureMode::WeightedPoolEvent));
    let calendar = needs_calendar.then(|| read_calendar(s, out)).transpose()?;
    let embs = if s.models.contains(&FeatureMode::GanEvent) {
        load_embeddings(&out.require(out.path(EMBEDDINGS), "embed-days")?)?
    } else {
        Vec::new()
    };
    let mut results = Vec::new();
    for &mode in &s.models {
        let source = match mode {
            FeatureMode::SalesOnly => EventSource::None,
            FeatureMode::GanEvent => EventSource::Embeddings(&embs),
            _ => EventSource::Calendar {
                calendar: calendar.as_ref().expect("loaded above"),
                lag: s.gan.lag,
            },
        };
        let cfg = s.forecast_config(mode);
        let warm = (s.warm_start > 0).then_some(s.warm_start);
        let mut predictor = LstmPredictor::new(&series, source, cfg.clone(), warm)?;
        let run = rolling_monthly_eval(&series, &mut predictor, s.test_year, cfg.window)?;
        eprintln!("forecast: {} done", mode.name());
        let lstm = &predictor.model().expect("trained during evaluation").lstm;
        results.push((mode, run, lstm.params.clone(), cfg, predictor.reports));
    }
    let mut models = Vec::new();
    for (mode, run, params, config, reports) in results {
        write_date_column(
            &out.path(&predictions_file(mode)),
            "prediction",
            run.start,
            &run.predictions,
        )?;
        checkpoint::save(&params, &out.path(&format!("forecast_{}.ckpt", mode.name())))?;
        models.push(ModelSidecar {
            model: run.model,
            config,
            windows: run.windows,
            reports,
        });
    }
    out.write_json(
        "forecast.json",
        &ForecastSidecar {
            test_year: s.test_year,
            warm_start: s.warm_start,
            models,
        },
    )?;
    println!("forecast: {} models for {}", s.models.len(), s.test_year);
    Ok(())
}

fn read_run(out: &OutDir, mode: FeatureMode) -> Result<ModelRun> {
    let path = out.require(out.path(&predictions_file(mode)), "forecast")?;
    let (start, predictions) = read_date_column(&path, "prediction")?;
    let start = start.with_context(|| format!("{} is empty", path.display()))?;
    Ok(ModelRun {
        model: mode.name().into(),
        start,
        predictions,
        windows: Vec::new(),
    })
}

pub fn evaluate(s: &Settings, out: &OutDir) -> Result<()> {
    let series = read_sales(s, out)?;
    let runs: Vec<ModelRun> = s.models.iter().map(|m| read_run(out, *m)).collect::<Result<_>>()?;
    let report = evaluate_runs(&series, &runs, &s.eval_config())?;
    let table = report.table();
    out.write(REPORT, report.to_csv()?.as_bytes())?;
    out.write("anomalies.csv", report.anomalies_csv().as_bytes())?;
    out.write("report.txt", table.as_bytes())?;
    print!("{table}");
    Ok(())
}

pub fn plot(s: &Settings, out: &OutDir, k: usize) -> Result<()> {
    let series = read_sales(s, out)?;
    let runs: Vec<ModelRun> = s
        .models
        .iter()
        .filter(|m| out.path(&predictions_file(**m)).is_file())
        .map(|m| read_run(out, *m))
        .collect::<Result<_>>()?;
    let dec = stl_decompose(series.values(), s.eval.period, s.eval.yearly_period)?;
    let doc = svg::report(&series, &dec, &runs, k);
    out.write("plot.svg", doc.as_bytes())?;
    println!("plot: {}", out.path("plot.svg").display());
    Ok(())
}
