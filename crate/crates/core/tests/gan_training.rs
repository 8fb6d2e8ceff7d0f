//! Training-loop contracts of the adversarial encoder.

mod common;

use std::f64::consts::LN_2;

use gan_event_core::events::{synth_corpus, EventCalendar, SynthCorpusConfig};
use gan_event_core::gan::{
    adversarial_from_probs, train_gan, training_days, GanConfig, GanTrainer, ModelConfig, TrainingDay,
};
use gan_event_core::numerics::checkpoint;

const DIM: usize = 6;

fn corpus(seed: u64, n_days: usize) -> EventCalendar {
    synth_corpus(&SynthCorpusConfig {
        seed,
        n_days,
        dim: DIM,
        events_per_day: (2, 6),
        ..SynthCorpusConfig::default()
    })
    .unwrap()
    .calendar
}

fn config(seed: u64) -> GanConfig {
    GanConfig {
        model: ModelConfig {
            dim: DIM,
            encoder: common::small_model(DIM).encoder,
        },
        epochs: 2,
        batch_size: 4,
        learning_rate: 1e-3,
        seed,
        ..GanConfig::default()
    }
}

fn days(seed: u64) -> Vec<TrainingDay> {
    training_days(&corpus(seed, 20), 0, None, None).unwrap()
}

#[test]
fn adversarial_reference_values() {
    let (d, g) = adversarial_from_probs(0.5, 0.5);
    assert!((d - 2.0 * LN_2).abs() < 1e-12);
    assert!((g - LN_2).abs() < 1e-12);
    let (d, _) = adversarial_from_probs(1.0 - 1e-12, 1e-12);
    assert!(d < 1e-9);
}

#[test]
fn without_discriminator_weight_its_parameters_stay_put() {
    let days = days(1);
    let mut t = GanTrainer::new(GanConfig {
        lambda_d: 0.0,
        ..config(1)
    })
    .unwrap();
    let d0 = t.discriminator.params.flat();
    let g0 = t.generator.params.flat();
    let log = t.run_epoch(&days).unwrap();
    assert_eq!(t.discriminator.params.flat(), d0);
    assert_ne!(t.generator.params.flat(), g0);
    assert!(log.d_loss.is_none() && log.g_adv.is_none());
    assert!(log.rec.is_some());
}

#[test]
fn without_reconstruction_weight_no_reconstruction_term() {
    let days = days(2);
    let mut t = GanTrainer::new(GanConfig {
        lambda_r: 0.0,
        ..config(2)
    })
    .unwrap();
    let log = t.run_epoch(&days).unwrap();
    assert!(log.rec.is_none());
    assert_eq!(Some(log.g_total), log.g_adv);
    assert!(log.d_loss.unwrap().is_finite());
}

#[test]
fn training_is_deterministic() {
    let cal = corpus(3, 20);
    let a = train_gan(&cal, &config(3)).unwrap();
    let b = train_gan(&cal, &config(3)).unwrap();
    assert_eq!(a.log, b.log);
    assert_eq!(a.generator.params, b.generator.params);
    assert_eq!(a.discriminator.params, b.discriminator.params);
    let c = train_gan(&cal, &config(4)).unwrap();
    assert_ne!(a.generator.params, c.generator.params);
}

#[test]
fn resume_matches_uninterrupted_run() {
    let days = days(5);
    let cfg = config(5);
    let mut full = GanTrainer::new(cfg.clone()).unwrap();
    let full_logs: Vec<_> = (0..3).map(|_| full.run_epoch(&days).unwrap()).collect();

    let mut first = GanTrainer::new(cfg.clone()).unwrap();
    first.run_epoch(&days).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("state.ckpt");
    checkpoint::save(&first.export_state(), &path).unwrap();
    drop(first);

    let mut resumed = GanTrainer::from_state(cfg, &checkpoint::load(&path).unwrap()).unwrap();
    assert_eq!(resumed.epochs_done(), 1);
    let rest: Vec<_> = (0..2).map(|_| resumed.run_epoch(&days).unwrap()).collect();
    assert_eq!(rest, full_logs[1..]);
    assert_eq!(resumed.generator.params, full.generator.params);
    assert_eq!(resumed.discriminator.params, full.discriminator.params);
}

#[test]
fn no_trainable_days_is_an_error() {
    let sparse = synth_corpus(&SynthCorpusConfig {
        n_days: 10,
        dim: DIM,
        events_per_day: (0, 1),
        ..SynthCorpusConfig::default()
    })
    .unwrap()
    .calendar;
    let cfg = GanConfig { lag: 0, ..config(6) };
    assert!(train_gan(&sparse, &cfg).is_err());
    assert!(train_gan(&EventCalendar::new(DIM), &cfg).is_err());
    let mut t = GanTrainer::new(cfg).unwrap();
    assert!(t.run_epoch(&[]).is_err());
}

#[test]
fn invalid_configs_are_rejected() {
    for bad in [
        GanConfig {
            mask_fraction: 0.0,
            ..config(0)
        },
        GanConfig {
            mask_fraction: 1.0,
            ..config(0)
        },
        GanConfig {
            lambda_r: 0.0,
            lambda_d: 0.0,
            ..config(0)
        },
        GanConfig {
            lambda_r: -1.0,
            ..config(0)
        },
    ] {
        assert!(GanTrainer::new(bad).is_err());
    }
}

#[test]
fn all_loss_variants_train_finitely() {
    let days = days(7);
    for use_hausdorff in [true, false] {
        for distance in gan_event_core::gan::DistanceFn::ALL {
            for saturating_g_loss in [true, false] {
                let cfg = GanConfig {
                    use_hausdorff,
                    distance,
                    saturating_g_loss,
                    ..config(7)
                };
                let log = GanTrainer::new(cfg).unwrap().run_epoch(&days).unwrap();
                assert!(log.g_total.is_finite());
            }
        }
    }
}
