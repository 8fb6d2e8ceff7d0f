use chrono::{Days, NaiveDate};

use super::config::FeatureMode;
use crate::embedding::DayEmbedding;
use crate::error::{contract, Result};
use crate::events::{Event, EventCalendar, SalesSeries};

/// Min-max scaling fitted on a training span.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaler {
    pub min: f64,
    pub max: f64,
}

impl Scaler {
    pub fn fit(values: &[f64]) -> Self {
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !min.is_finite() {
            return Self { min: 0.0, max: 1.0 };
        }
        Self { min, max }
    }

    pub fn identity() -> Self {
        Self { min: 0.0, max: 1.0 }
    }

    fn range(&self) -> f64 {
        let r = self.max - self.min;
        if r > 0.0 {
            r
        } else {
            1.0
        }
    }

    pub fn scale(&self, v: f64) -> f64 {
        (v - self.min) / self.range()
    }

    pub fn unscale(&self, s: f64) -> f64 {
        self.min + s * self.range()
    }

    /// Scaled value corresponding to zero sales.
    pub fn zero_floor(&self) -> f64 {
        self.scale(0.0)
    }
}

/// Where the event half of a feature row comes from.
#[derive(Debug, Clone, Copy)]
pub enum EventSource<'a> {
    None,
    Embeddings(&'a [DayEmbedding]),
    Calendar { calendar: &'a EventCalendar, lag: u32 },
}

/// Average of event vectors, optionally weighted by link count. Empty sets
/// give zeros; all-zero weights fall back to the plain mean.
pub fn pool_events(events: &[&Event], weighted: bool, dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    if events.is_empty() {
        return out;
    }
    let weights: Vec<f64> = if weighted && events.iter().any(|e| e.link_count > 0) {
        events.iter().map(|e| e.link_count as f64).collect()
    } else {
        vec![1.0; events.len()]
    };
    let total: f64 = weights.iter().sum();
    for (e, w) in events.iter().zip(&weights) {
        for (o, v) in out.iter_mut().zip(&e.embedding) {
            *o += w * v;
        }
    }
    for o in &mut out {
        *o /= total;
    }
    out
}

/// Per-day input rows `[scaled S_t ‖ event feature_t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub start: NaiveDate,
    pub mode: FeatureMode,
    pub scaler: Scaler,
    pub rows: Vec<Vec<f64>>,
}

impl FeatureMatrix {
    pub fn width(&self) -> usize {
        self.rows.first().map_or(1, Vec::len)
    }

    pub fn targets(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r[0]).collect()
    }

    pub fn event_part(&self, t: usize) -> &[f64] {
        &self.rows[t][1..]
    }
}

/// Event feature rows for `n` consecutive days from `start`. Empty for
/// [`FeatureMode::SalesOnly`].
pub fn event_rows(start: NaiveDate, n: usize, source: EventSource<'_>, mode: FeatureMode) -> Result<Vec<Vec<f64>>> {
    let dates = (0..n).map(|i| start + Days::new(i as u64));
    match (mode, source) {
        (FeatureMode::SalesOnly, _) => Ok(vec![Vec::new(); n]),
        (FeatureMode::GanEvent, EventSource::Embeddings(embs)) => {
            let first = embs.first().ok_or_else(|| contract("no day embeddings supplied"))?.date;
            dates
                .map(|d| {
                    let off = (d - first).num_days();
                    usize::try_from(off)
                        .ok()
                        .and_then(|i| embs.get(i))
                        .filter(|e| e.date == d)
                        .map(|e| e.vector.clone())
                        .ok_or_else(|| contract(format!("missing day embedding for {d}")))
                })
                .collect()
        }
        (FeatureMode::MeanPoolEvent | FeatureMode::WeightedPoolEvent, EventSource::Calendar { calendar, lag }) => {
            let weighted = mode == FeatureMode::WeightedPoolEvent;
            Ok(dates
                .map(|d| pool_events(&calendar.day_event_set_with_lag(d, lag), weighted, calendar.dim()))
                .collect())
        }
        (m, _) => Err(contract(format!("feature mode {m} needs a matching event source"))),
    }
}

/// Joins scaled sales with event rows: `[scaled S_t ‖ e_t]`.
pub fn join_rows(values: &[f64], events: &[Vec<f64>], scaler: Scaler) -> Vec<Vec<f64>> {
    values
        .iter()
        .zip(events)
        .map(|(v, e)| {
            let mut r = Vec::with_capacity(1 + e.len());
            r.push(scaler.scale(*v));
            r.extend_from_slice(e);
            r
        })
        .collect()
}

pub fn build_features(
    series: &SalesSeries,
    source: EventSource<'_>,
    mode: FeatureMode,
    scaler: Scaler,
) -> Result<FeatureMatrix> {
    let events = event_rows(series.start(), series.len(), source, mode)?;
    Ok(FeatureMatrix {
        start: series.start(),
        mode,
        scaler,
        rows: join_rows(series.values(), &events, scaler),
    })
}
