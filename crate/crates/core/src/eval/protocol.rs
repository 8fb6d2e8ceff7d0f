//! Rolling monthly evaluation over one test year.

use std::ops::Range;

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::events::SalesSeries;
use crate::forecast::{
    event_rows, join_rows, train_forecaster, EventSource, ForecastConfig, Forecaster, Scaler, TrainReport,
};

/// A model evaluated month by month. `history` always ends on the day
/// before the first day to predict; nothing later is ever passed in.
pub trait MonthPredictor {
    fn name(&self) -> String;
    fn predict(&mut self, month: u32, history: &SalesSeries, horizon: usize) -> Result<Vec<f64>>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonthWindow {
    pub month: u32,
    /// Last day of sales the model saw.
    pub train_end: NaiveDate,
    pub pred_start: NaiveDate,
    /// Last day kept for scoring.
    pub pred_end: NaiveDate,
}

/// Daily predictions for a whole test year.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelRun {
    pub model: String,
    pub start: NaiveDate,
    pub predictions: Vec<f64>,
    pub windows: Vec<MonthWindow>,
}

fn ymd(y: i32, m: u32, d: u32) -> Result<NaiveDate> {
    NaiveDate::from_ymd_opt(y, m, d).ok_or_else(|| contract(format!("invalid date {y}-{m}-{d}")))
}

/// Index range of `year` in `series`. Requires a full preceding year of
/// history and full coverage of the year itself.
pub fn test_year_range(series: &SalesSeries, year: i32) -> Result<Range<usize>> {
    let (first, last) = (ymd(year, 1, 1)?, ymd(year, 12, 31)?);
    let (Some(a), Some(b)) = (series.index_of(first), series.index_of(last)) else {
        return Err(contract(format!("series does not cover test year {year}")));
    };
    if a < 365 {
        return Err(contract(format!(
            "insufficient history: {a} days before {first}, need at least 365"
        )));
    }
    Ok(a..b + 1)
}

/// For each month of `year`: hand the predictor all sales before the
/// month, ask for `max(window, month length)` days (clipped at the series
/// end) and keep the month's days.
pub fn rolling_monthly_eval(
    series: &SalesSeries,
    predictor: &mut dyn MonthPredictor,
    year: i32,
    window: usize,
) -> Result<ModelRun> {
    let range = test_year_range(series, year)?;
    let mut predictions = Vec::with_capacity(range.len());
    let mut windows = Vec::with_capacity(12);
    for month in 1..=12 {
        let first = ymd(year, month, 1)?;
        let next = if month == 12 {
            ymd(year + 1, 1, 1)?
        } else {
            ymd(year, month + 1, 1)?
        };
        let len = (next - first).num_days() as usize;
        let at = series.index_of(first).expect("inside test year");
        let horizon = window.max(len).min(series.len() - at);
        let history = SalesSeries::new(series.category.clone(), series.start(), series.values()[..at].to_vec())?;
        let out = predictor.predict(month, &history, horizon)?;
        if out.len() != horizon || out.iter().any(|v| !v.is_finite()) {
            return Err(contract(format!(
                "{} returned {} values for a horizon of {horizon}, or non-finite output",
                predictor.name(),
                out.len()
            )));
        }
        predictions.extend_from_slice(&out[..len]);
        windows.push(MonthWindow {
            month,
            train_end: history.end(),
            pred_start: first,
            pred_end: first + Days::new(len as u64 - 1),
        });
    }
    Ok(ModelRun {
        model: predictor.name(),
        start: series.date(range.start),
        predictions,
        windows,
    })
}

/// Returns the true values. Only useful for checking the metrics.
#[derive(Debug, Clone)]
pub struct OraclePredictor {
    pub truth: SalesSeries,
}

impl MonthPredictor for OraclePredictor {
    fn name(&self) -> String {
        "oracle".into()
    }

    fn predict(&mut self, _month: u32, history: &SalesSeries, horizon: usize) -> Result<Vec<f64>> {
        let at = self
            .truth
            .index_of(history.end() + Days::new(1))
            .ok_or_else(|| contract("oracle truth does not cover the window"))?;
        Ok(self.truth.values()[at..at + horizon].to_vec())
    }
}

/// Repeats the last observed `period` days.
#[derive(Debug, Clone, Copy)]
pub struct SeasonalNaive {
    pub period: usize,
}

impl MonthPredictor for SeasonalNaive {
    fn name(&self) -> String {
        "seasonal_naive".into()
    }

    fn predict(&mut self, _month: u32, history: &SalesSeries, horizon: usize) -> Result<Vec<f64>> {
        let v = history.values();
        if v.len() < self.period || self.period == 0 {
            return Err(contract("history shorter than the naive period"));
        }
        let last = &v[v.len() - self.period..];
        Ok((0..horizon).map(|i| last[i % self.period]).collect())
    }
}

/// LSTM forecaster retrained before every month. With `warm_start` set,
/// months after the first continue from the previous month's weights for
/// that many epochs instead of starting over.
#[derive(Debug, Clone)]
pub struct LstmPredictor {
    pub config: ForecastConfig,
    pub warm_start: Option<usize>,
    events_start: NaiveDate,
    events: Vec<Vec<f64>>,
    model: Option<Forecaster>,
    pub reports: Vec<(u32, TrainReport)>,
}

impl LstmPredictor {
    /// Precomputes event features for every day of `series`.
    pub fn new(
        series: &SalesSeries,
        source: EventSource<'_>,
        config: ForecastConfig,
        warm_start: Option<usize>,
    ) -> Result<Self> {
        config.validate()?;
        let events = event_rows(series.start(), series.len(), source, config.feature_mode)?;
        Ok(Self {
            config,
            warm_start,
            events_start: series.start(),
            events,
            model: None,
            reports: Vec::new(),
        })
    }

    pub fn model(&self) -> Option<&Forecaster> {
        self.model.as_ref()
    }
}

impl MonthPredictor for LstmPredictor {
    fn name(&self) -> String {
        self.config.feature_mode.name().into()
    }

    fn predict(&mut self, month: u32, history: &SalesSeries, horizon: usize) -> Result<Vec<f64>> {
        let off = (history.start() - self.events_start).num_days();
        let off = usize::try_from(off).map_err(|_| contract("history starts before the event features"))?;
        let n = history.len();
        if off + n + horizon > self.events.len() {
            return Err(contract("event features do not cover the prediction window"));
        }
        let scaler = Scaler::fit(history.values());
        let rows = join_rows(history.values(), &self.events[off..off + n], scaler);
        let report = match (&mut self.model, self.warm_start) {
            (Some(model), Some(epochs)) => model.fit(&rows, epochs)?,
            _ => {
                let (model, report) = train_forecaster(&rows, &self.config)?;
                self.model = Some(model);
                report
            }
        };
        self.reports.push((month, report));
        let model = self.model.as_ref().expect("trained above");
        let ctx = self.config.input_chunk.min(n);
        let future = &self.events[off + n..off + n + horizon];
        let scaled = model.predict_scaled(&rows[n - ctx..], future, scaler.zero_floor())?;
        Ok(scaled.into_iter().map(|s| scaler.unscale(s).max(0.0)).collect())
    }
}
