//! Synthetic event corpora and sales series with planted event effects.
//!
//! Corpus: `n_clusters` unit-norm cluster centres in embedding space. Each
//! day picks a theme cluster; each of its events comes from the theme with
//! probability `theme_prob` and from a uniformly random cluster otherwise.
//!
//! Sales: linear trend, weekly and yearly sinusoids, Gaussian noise and
//! additive impulses, clipped at zero. An impulse fires on any day whose
//! dominant event category appears in the impact map.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{Days, NaiveDate};
use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, Normal, WeightedIndex};
use serde::{Deserialize, Serialize};

use super::calendar::{window_end, window_start, Event, EventCalendar};
use super::series::{read_date_column, write_date_column, SalesSeries};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthCorpusConfig {
    pub seed: u64,
    pub n_clusters: usize,
    /// Inclusive range of events per day.
    pub events_per_day: (usize, usize),
    pub n_days: usize,
    pub dim: usize,
    pub start: NaiveDate,
    /// Probability that an event belongs to the day's theme cluster.
    pub theme_prob: f64,
    /// Norm of the per-event deviation from its cluster centre.
    pub spread: f64,
    /// Relative frequency of each cluster as a day theme; uniform when empty.
    pub theme_weights: Vec<f64>,
}

impl Default for SynthCorpusConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_clusters: 5,
            events_per_day: (3, 15),
            n_days: 365,
            dim: 16,
            start: NaiveDate::from_ymd_opt(2016, 1, 1).expect("date"),
            theme_prob: 0.8,
            spread: 0.5,
            theme_weights: Vec::new(),
        }
    }
}

/// Category label of cluster `c`.
pub fn cluster_label(c: usize) -> String {
    format!("cluster-{c}")
}

/// Generated corpus plus the ground truth behind it.
#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub calendar: EventCalendar,
    pub centres: Vec<Vec<f64>>,
    /// Theme cluster of each generated day.
    pub themes: Vec<usize>,
}

fn unit_gaussian(dim: usize, rng: &mut rng::Rng) -> Vec<f64> {
    let n = Normal::new(0.0, 1.0).expect("normal");
    let v: Vec<f64> = (0..dim).map(|_| n.sample(rng)).collect();
    let norm = crate::numerics::tensor::norm(&v);
    v.into_iter().map(|x| x / norm).collect()
}

pub fn synth_corpus(cfg: &SynthCorpusConfig) -> Result<SynthCorpus> {
    if cfg.n_clusters < 1 || cfg.dim < 2 {
        return Err(Error::Config("synth_corpus needs n_clusters >= 1 and dim >= 2".into()));
    }
    let (lo, hi) = cfg.events_per_day;
    if lo > hi {
        return Err(Error::Config("events_per_day range is empty".into()));
    }
    if !(0.0..=1.0).contains(&cfg.theme_prob) {
        return Err(Error::Config("theme_prob must lie in [0, 1]".into()));
    }
    let last = cfg.start + Days::new(cfg.n_days.saturating_sub(1) as u64);
    if cfg.start < window_start() || (cfg.n_days > 0 && last > window_end()) {
        return Err(Error::Config(format!(
            "synthetic days {}..={last} leave the event window",
            cfg.start
        )));
    }
    let weights = if cfg.theme_weights.is_empty() {
        vec![1.0; cfg.n_clusters]
    } else if cfg.theme_weights.len() == cfg.n_clusters {
        cfg.theme_weights.clone()
    } else {
        return Err(Error::Config("theme_weights needs one weight per cluster".into()));
    };
    let theme_dist = WeightedIndex::new(&weights).map_err(|e| Error::Config(e.to_string()))?;

    let mut crng = rng::stream(cfg.seed, "synth/centres");
    let centres: Vec<Vec<f64>> = (0..cfg.n_clusters).map(|_| unit_gaussian(cfg.dim, &mut crng)).collect();

    let mut rng = rng::stream(cfg.seed, "synth/events");
    let noise = Normal::new(0.0, cfg.spread / (cfg.dim as f64).sqrt()).expect("sd");
    let mut cal = EventCalendar::new(cfg.dim);
    let mut themes = Vec::with_capacity(cfg.n_days);
    let max_links = 10_000f64.ln();
    for day in 0..cfg.n_days {
        let date = cfg.start + Days::new(day as u64);
        let theme = theme_dist.sample(&mut rng);
        themes.push(theme);
        let n = rng.gen_range(lo..=hi);
        for k in 0..n {
            let cluster = if rng.gen::<f64>() < cfg.theme_prob {
                theme
            } else {
                rng.gen_range(0..cfg.n_clusters)
            };
            let embedding = centres[cluster].iter().map(|c| c + noise.sample(&mut rng)).collect();
            let link_count = rng.gen_range(0.0..max_links).exp().round() as u64;
            cal.insert(Event {
                id: format!("syn-{day:05}-{k:02}"),
                title: format!("synthetic {} event {k} on {date}", cluster_label(cluster)),
                date,
                category: cluster_label(cluster),
                link_count,
                embedding,
            })?;
        }
    }
    Ok(SynthCorpus {
        calendar: cal,
        centres,
        themes,
    })
}

/// An additive demand impulse: `magnitude` on the trigger day, decaying
/// linearly to zero over the following `decay_days` days.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Impulse {
    pub magnitude: f64,
    pub decay_days: u32,
}

impl Impulse {
    /// Contribution `offset` days after the trigger.
    pub fn at(&self, offset: u32) -> f64 {
        if offset > self.decay_days {
            0.0
        } else {
            self.magnitude * f64::from(self.decay_days + 1 - offset) / f64::from(self.decay_days + 1)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSalesConfig {
    pub seed: u64,
    pub category: String,
    pub start: NaiveDate,
    pub n_days: usize,
    pub base_level: f64,
    /// Trend increase per day.
    pub trend_slope: f64,
    pub weekly_amp: f64,
    pub yearly_amp: f64,
    pub noise_sd: f64,
    /// Event category -> impulse fired on days dominated by that category.
    pub impact_map: BTreeMap<String, Impulse>,
    /// Impulses at fixed dates, independent of the calendar.
    pub planted: Vec<(NaiveDate, Impulse)>,
}

impl Default for SynthSalesConfig {
    fn default() -> Self {
        let mut impact_map = BTreeMap::new();
        impact_map.insert(
            cluster_label(0),
            Impulse {
                magnitude: 600.0,
                decay_days: 0,
            },
        );
        Self {
            seed: 0,
            category: "synthetic".into(),
            start: NaiveDate::from_ymd_opt(2016, 1, 1).expect("date"),
            n_days: 365,
            base_level: 500.0,
            trend_slope: 0.1,
            weekly_amp: 60.0,
            yearly_amp: 80.0,
            noise_sd: 10.0,
            impact_map,
            planted: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSales {
    pub series: SalesSeries,
    /// Total impulse contribution per day (ground truth).
    pub impulses: Vec<f64>,
    /// Days on which an impulse was triggered.
    pub trigger_days: Vec<NaiveDate>,
}

impl SynthSales {
    pub fn impulses_to_csv(&self, path: &Path) -> Result<()> {
        write_date_column(path, "impulse", self.series.start(), &self.impulses)
    }
}

/// Reads a `date,impulse` sidecar.
pub fn read_impulses(path: &Path) -> Result<(Option<NaiveDate>, Vec<f64>)> {
    read_date_column(path, "impulse")
}

pub fn synth_sales(cfg: &SynthSalesConfig, calendar: &EventCalendar) -> Result<SynthSales> {
    if cfg.noise_sd < 0.0 {
        return Err(Error::Config("noise_sd must be >= 0".into()));
    }
    let n = cfg.n_days;
    let mut triggers: Vec<(usize, Impulse)> = Vec::new();
    for i in 0..n {
        let date = cfg.start + Days::new(i as u64);
        if let Some(imp) = calendar.dominant_category(date).and_then(|c| cfg.impact_map.get(c)) {
            triggers.push((i, *imp));
        }
    }
    for (date, imp) in &cfg.planted {
        let off = (*date - cfg.start).num_days();
        if off >= 0 && (off as usize) < n {
            triggers.push((off as usize, *imp));
        }
    }
    triggers.sort_by_key(|(i, _)| *i);

    let mut impulses = vec![0.0; n];
    for (i, imp) in &triggers {
        for off in 0..=imp.decay_days {
            if let Some(slot) = impulses.get_mut(i + off as usize) {
                *slot += imp.at(off);
            }
        }
    }

    let mut rng = rng::stream(cfg.seed, "synth/sales-noise");
    let noise = Normal::new(0.0, cfg.noise_sd.max(f64::MIN_POSITIVE)).expect("sd");
    let tau = std::f64::consts::TAU;
    let values = (0..n)
        .map(|i| {
            let t = i as f64;
            let eps = noise.sample(&mut rng);
            let eps = if cfg.noise_sd == 0.0 { 0.0 } else { eps };
            let v = cfg.base_level
                + cfg.trend_slope * t
                + cfg.weekly_amp * (tau * t / 7.0).sin()
                + cfg.yearly_amp * (tau * t / 365.25).sin()
                + eps
                + impulses[i];
            v.max(0.0)
        })
        .collect();
    let mut trigger_days: Vec<NaiveDate> = triggers.iter().map(|(i, _)| cfg.start + Days::new(*i as u64)).collect();
    trigger_days.dedup();
    Ok(SynthSales {
        series: SalesSeries::new(cfg.category.clone(), cfg.start, values)?,
        impulses,
        trigger_days,
    })
}

/// `count` distinct days drawn uniformly from `[start, start + n_days)`,
/// sorted, for planting impulses.
pub fn random_days(seed: u64, start: NaiveDate, n_days: usize, count: usize) -> Vec<NaiveDate> {
    let mut rng = rng::stream(seed, "synth/planted-days");
    let mut idx: Vec<usize> = (0..n_days).collect();
    idx.shuffle(&mut rng);
    let mut picked: Vec<usize> = idx.into_iter().take(count).collect();
    picked.sort_unstable();
    picked.into_iter().map(|i| start + Days::new(i as u64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::cosine;

    fn mean(v: &[f64]) -> f64 {
        v.iter().sum::<f64>() / v.len() as f64
    }

    #[test]
    fn corpus_is_deterministic() {
        let cfg = SynthCorpusConfig {
            seed: 11,
            n_days: 40,
            ..Default::default()
        };
        let a = synth_corpus(&cfg).unwrap();
        let b = synth_corpus(&cfg).unwrap();
        assert_eq!(a.calendar, b.calendar);
        let bits = |c: &EventCalendar| -> Vec<u64> {
            c.iter().flat_map(|e| e.embedding.iter().map(|v| v.to_bits())).collect()
        };
        assert_eq!(bits(&a.calendar), bits(&b.calendar));
        let per_day: Vec<usize> = a.calendar.days().map(|(_, e)| e.len()).collect();
        assert!(per_day.iter().all(|n| (3..=15).contains(n)));
    }

    #[test]
    fn single_cluster_variance_matches_spread() {
        let cfg = SynthCorpusConfig {
            seed: 3,
            n_clusters: 1,
            n_days: 200,
            dim: 8,
            spread: 0.4,
            ..Default::default()
        };
        let c = synth_corpus(&cfg).unwrap();
        assert!(c.themes.iter().all(|&t| t == 0));
        // per-coordinate variance of events around the shared centre
        let sd2 = 0.4f64 * 0.4 / 8.0;
        let mut within = Vec::new();
        for (_, evs) in c.calendar.days() {
            for j in 0..8 {
                let col: Vec<f64> = evs.iter().map(|e| e.embedding[j]).collect();
                let m = mean(&col);
                let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (col.len() - 1) as f64;
                within.push(var);
            }
        }
        let est = mean(&within);
        assert!((est - sd2).abs() < 0.1 * sd2, "within-day variance {est} vs {sd2}");
    }

    #[test]
    fn within_day_similarity_exceeds_across_day() {
        let cfg = SynthCorpusConfig {
            seed: 5,
            n_days: 120,
            ..Default::default()
        };
        let c = synth_corpus(&cfg).unwrap();
        let days: Vec<&[Event]> = c.calendar.days().map(|(_, e)| e).collect();
        let (mut within, mut across) = (Vec::new(), Vec::new());
        for (di, evs) in days.iter().enumerate() {
            for i in 0..evs.len() {
                for j in i + 1..evs.len() {
                    within.push(cosine(&evs[i].embedding, &evs[j].embedding));
                }
            }
            let other = days[(di + 1) % days.len()];
            for a in evs.iter() {
                for b in other {
                    across.push(cosine(&a.embedding, &b.embedding));
                }
            }
        }
        let (w, a) = (mean(&within), mean(&across));
        assert!(w - a >= 0.1, "within {w} across {a}");
    }

    #[test]
    fn impulse_is_additive() {
        let corpus = synth_corpus(&SynthCorpusConfig {
            seed: 1,
            n_days: 30,
            ..Default::default()
        })
        .unwrap();
        let day: NaiveDate = "2016-01-10".parse().unwrap();
        let base = SynthSalesConfig {
            n_days: 30,
            impact_map: BTreeMap::new(),
            ..Default::default()
        };
        let with = SynthSalesConfig {
            planted: vec![(
                day,
                Impulse {
                    magnitude: 1000.0,
                    decay_days: 0,
                },
            )],
            ..base.clone()
        };
        let a = synth_sales(&base, &corpus.calendar).unwrap();
        let b = synth_sales(&with, &corpus.calendar).unwrap();
        for i in 0..30 {
            let diff = b.series.values()[i] - a.series.values()[i];
            if i == 9 {
                assert!((diff - 1000.0).abs() < 1e-9);
            } else {
                assert_eq!(diff, 0.0);
            }
        }
        assert_eq!(b.trigger_days, vec![day]);
    }

    #[test]
    fn impact_map_fires_on_theme_days() {
        let corpus = synth_corpus(&SynthCorpusConfig {
            seed: 2,
            n_days: 100,
            events_per_day: (5, 9),
            theme_prob: 1.0,
            ..Default::default()
        })
        .unwrap();
        let s = synth_sales(
            &SynthSalesConfig {
                n_days: 100,
                ..Default::default()
            },
            &corpus.calendar,
        )
        .unwrap();
        let expected: Vec<usize> = (0..100).filter(|&i| corpus.themes[i] == 0).collect();
        let got: Vec<usize> = (0..100).filter(|&i| s.impulses[i] > 0.0).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn linear_decay() {
        let imp = Impulse {
            magnitude: 300.0,
            decay_days: 2,
        };
        assert_eq!([imp.at(0), imp.at(1), imp.at(2), imp.at(3)], [300.0, 200.0, 100.0, 0.0]);
    }

    #[test]
    fn bad_configs_rejected() {
        assert!(synth_corpus(&SynthCorpusConfig {
            dim: 1,
            ..Default::default()
        })
        .is_err());
        assert!(synth_corpus(&SynthCorpusConfig {
            start: "2020-12-01".parse().unwrap(),
            n_days: 60,
            ..Default::default()
        })
        .is_err());
    }
}
