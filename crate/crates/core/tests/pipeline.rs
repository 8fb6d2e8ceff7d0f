//! Anomaly recovery and a small end-to-end forecasting run.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use gan_event_core::embedding::{embed_range, load_embeddings, save_embeddings};
use gan_event_core::eval::{
    evaluate_runs, rolling_monthly_eval, stl_decompose, top_k_anomalies, EvalConfig, LstmPredictor, OraclePredictor,
};
use gan_event_core::events::{random_days, synth_corpus, synth_sales, Impulse, SynthCorpusConfig, SynthSalesConfig};
use gan_event_core::forecast::{EventSource, FeatureMode, ForecastConfig};
use gan_event_core::gan::{train_gan, EncoderConfig, GanConfig, ModelConfig};

fn start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2016, 1, 1).unwrap()
}

#[test]
fn planted_impulses_are_recovered_as_top_anomalies() {
    let empty = gan_event_core::EventCalendar::new(4);
    for seed in 0..5 {
        let days = random_days(seed, start(), 365, 10);
        let planted = days
            .iter()
            .map(|d| {
                (
                    *d,
                    Impulse {
                        magnitude: 250.0,
                        decay_days: 0,
                    },
                )
            })
            .collect();
        let cfg = SynthSalesConfig {
            seed,
            noise_sd: 5.0,
            impact_map: BTreeMap::new(),
            planted,
            ..SynthSalesConfig::default()
        };
        let sales = synth_sales(&cfg, &empty).unwrap();
        let dec = stl_decompose(sales.series.values(), 7, None).unwrap();
        let top = top_k_anomalies(&dec.residual, 0..365, 10, false).unwrap();
        let hits = top.iter().filter(|i| days.contains(&sales.series.date(**i))).count();
        assert!(hits >= 8, "seed {seed}: {hits} of 10 recovered");
    }
}

fn forecast_cfg(mode: FeatureMode) -> ForecastConfig {
    ForecastConfig {
        hidden_size: 8,
        input_chunk: 30,
        epochs: 3,
        feature_mode: mode,
        seed: 3,
        ..ForecastConfig::default()
    }
}

#[test]
fn small_pipeline_runs_and_replays_from_cache() {
    let n_days = 731;
    let corpus = synth_corpus(&SynthCorpusConfig {
        seed: 3,
        n_days,
        dim: 8,
        events_per_day: (2, 4),
        ..SynthCorpusConfig::default()
    })
    .unwrap();
    let sales = synth_sales(
        &SynthSalesConfig {
            seed: 3,
            n_days,
            ..SynthSalesConfig::default()
        },
        &corpus.calendar,
    )
    .unwrap();
    let gcfg = GanConfig {
        model: ModelConfig {
            dim: 8,
            encoder: EncoderConfig {
                model_dim: 8,
                heads: 2,
                ff_dim: 16,
                layers: 1,
                dropout: 0.0,
            },
        },
        epochs: 1,
        lag: 0,
        train_end: Some(NaiveDate::from_ymd_opt(2016, 3, 31).unwrap()),
        seed: 3,
        ..GanConfig::default()
    };
    let gan = train_gan(&corpus.calendar, &gcfg).unwrap();
    let embs = embed_range(&gan.generator, &corpus.calendar, start(), sales.series.end(), 0).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("emb.csv");
    save_embeddings(&embs, &path).unwrap();
    let cached = load_embeddings(&path).unwrap();

    let run = |embs: &[gan_event_core::DayEmbedding], mode: FeatureMode| {
        let src = match mode {
            FeatureMode::GanEvent => EventSource::Embeddings(embs),
            _ => EventSource::None,
        };
        let mut p = LstmPredictor::new(&sales.series, src, forecast_cfg(mode), Some(1)).unwrap();
        let r = rolling_monthly_eval(&sales.series, &mut p, 2017, 30).unwrap();
        assert_eq!(p.reports.len(), 12);
        r
    };
    let gan_run = run(&embs, FeatureMode::GanEvent);
    assert_eq!(run(&cached, FeatureMode::GanEvent), gan_run);
    let base = run(&embs, FeatureMode::SalesOnly);
    assert_eq!(gan_run.predictions.len(), 365);
    assert_eq!(gan_run.windows.len(), 12);

    let cfg = EvalConfig {
        n_resamples: 500,
        ..EvalConfig::default()
    };
    let single = evaluate_runs(&sales.series, std::slice::from_ref(&base), &cfg).unwrap();
    assert_eq!(single.rows.len(), 3);
    assert!(single.rows.iter().all(|r| r.p_value_vs_best.is_none()));

    let report = evaluate_runs(&sales.series, &[base, gan_run], &cfg).unwrap();
    assert_eq!(report.rows.len(), 6);
    for k in [5, 10, 20] {
        let rows: Vec<_> = report.rows.iter().filter(|r| r.k == k).collect();
        assert_eq!(rows.iter().filter(|r| r.p_value_vs_best.is_none()).count(), 1);
        assert!(rows.iter().all(|r| r.mae.is_finite()));
    }

    let mut oracle = OraclePredictor {
        truth: sales.series.clone(),
    };
    let perfect = rolling_monthly_eval(&sales.series, &mut oracle, 2017, 30).unwrap();
    let rep = evaluate_runs(&sales.series, &[perfect], &cfg).unwrap();
    assert!(rep.rows.iter().all(|r| r.mae == 0.0 && r.wmape == Some(0.0)));
}
