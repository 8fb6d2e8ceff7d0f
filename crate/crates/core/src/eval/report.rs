//! Metrics per model and K, significance against the best model, output.

use std::fmt::Write as _;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::metrics::{mae_at_k, top_k_anomalies, wmape_at_k};
use super::protocol::{test_year_range, ModelRun};
use super::significance::{paired_permutation_test, DEFAULT_RESAMPLES};
use super::stl::stl_decompose;
use crate::error::{contract, Result};
use crate::events::SalesSeries;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub ks: Vec<usize>,
    pub period: usize,
    /// Second seasonal pass of this period, when the series is long enough.
    pub yearly_period: Option<usize>,
    /// Rank by signed residual instead of its magnitude.
    pub signed_residuals: bool,
    pub n_resamples: usize,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            ks: vec![5, 10, 20],
            period: 7,
            yearly_period: None,
            signed_residuals: false,
            n_resamples: DEFAULT_RESAMPLES,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub category: String,
    pub model: String,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "MAE")]
    pub mae: f64,
    #[serde(rename = "wMAPE")]
    pub wmape: Option<f64>,
    pub p_value_vs_best: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnomalySet {
    pub k: usize,
    pub dates: Vec<NaiveDate>,
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub rows: Vec<MetricRow>,
    pub anomalies: Vec<AnomalySet>,
}

fn abs_errors(y: &[f64], yhat: &[f64], days: &[usize]) -> Vec<f64> {
    days.iter().map(|d| (y[*d] - yhat[*d]).abs()).collect()
}

/// Scores every run on the top-K anomalous days of the test year. With two
/// or more runs, each non-best run gets a one-tailed p-value for the best
/// run having lower absolute errors on those days.
pub fn evaluate_runs(series: &SalesSeries, runs: &[ModelRun], cfg: &EvalConfig) -> Result<EvalReport> {
    let Some(first) = runs.first() else {
        return Err(contract("no model runs to evaluate"));
    };
    let year = chrono::Datelike::year(&first.start);
    let range = test_year_range(series, year)?;
    for r in runs {
        if r.start != series.date(range.start) || r.predictions.len() != range.len() {
            return Err(contract(format!("run {} does not cover test year {year}", r.model)));
        }
    }
    let dec = stl_decompose(&series.values()[..range.end], cfg.period, cfg.yearly_period)?;
    let y = &series.values()[range.clone()];
    let mut rows = Vec::new();
    let mut anomalies = Vec::new();
    for &k in &cfg.ks {
        let idx = top_k_anomalies(&dec.residual, range.clone(), k, cfg.signed_residuals)?;
        anomalies.push(AnomalySet {
            k,
            dates: idx.iter().map(|i| series.date(*i)).collect(),
            residuals: idx.iter().map(|i| dec.residual[*i]).collect(),
        });
        let days: Vec<usize> = idx.iter().map(|i| i - range.start).collect();
        let scored: Vec<(f64, Option<f64>)> = runs
            .iter()
            .map(|r| {
                Ok((
                    mae_at_k(y, &r.predictions, &days)?,
                    wmape_at_k(y, &r.predictions, &days)?,
                ))
            })
            .collect::<Result<_>>()?;
        let key = |s: &(f64, Option<f64>)| (s.1.unwrap_or(f64::INFINITY), s.0);
        let best = (0..runs.len())
            .min_by(|a, b| key(&scored[*a]).partial_cmp(&key(&scored[*b])).expect("finite metrics"))
            .expect("non-empty");
        let best_err = abs_errors(y, &runs[best].predictions, &days);
        for (i, (r, (mae, wmape))) in runs.iter().zip(&scored).enumerate() {
            let p = if runs.len() >= 2 && i != best && days.len() >= 2 {
                let seed = rng::indexed_subseed(cfg.seed, "eval/k", k as u64);
                Some(paired_permutation_test(
                    &best_err,
                    &abs_errors(y, &r.predictions, &days),
                    cfg.n_resamples,
                    seed,
                )?)
            } else {
                None
            };
            rows.push(MetricRow {
                category: series.category.clone(),
                model: r.model.clone(),
                k,
                mae: *mae,
                wmape: *wmape,
                p_value_vs_best: p,
            });
        }
    }
    Ok(EvalReport { rows, anomalies })
}

impl EvalReport {
    pub fn row(&self, model: &str, k: usize) -> Option<&MetricRow> {
        self.rows.iter().find(|r| r.model == model && r.k == k)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["category", "model", "K", "MAE", "wMAPE", "p_value_vs_best"])?;
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
        for r in &self.rows {
            w.write_record([
                r.category.clone(),
                r.model.clone(),
                r.k.to_string(),
                r.mae.to_string(),
                opt(r.wmape),
                opt(r.p_value_vs_best),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| contract(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("utf8"))
    }

    pub fn from_csv(text: &str) -> Result<Vec<MetricRow>> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
    }

    pub fn anomalies_csv(&self) -> String {
        let mut s = String::from("K,rank,date,residual\n");
        for a in &self.anomalies {
            for (i, (d, r)) in a.dates.iter().zip(&a.residuals).enumerate() {
                let _ = writeln!(s, "{},{},{d},{r}", a.k, i + 1);
            }
        }
        s
    }

    /// Fixed-width table; `*` marks p < 0.05 against the best model.
    pub fn table(&self) -> String {
        let mut s = format!(
            "{:<14} {:<22} {:>3} {:>12} {:>8} {:>9}\n",
            "category", "model", "K", "MAE", "wMAPE", "p"
        );
        for r in &self.rows {
            let w = r.wmape.map_or("-".into(), |v| format!("{v:.4}"));
            let p = match r.p_value_vs_best {
                Some(p) if p < 0.05 => format!("{p:.4}*"),
                Some(p) => format!("{p:.4}"),
                None => "-".into(),
            };
            let _ = writeln!(
                s,
                "{:<14} {:<22} {:>3} {:>12.3} {:>8} {:>9}",
                r.category, r.model, r.k, r.mae, w, p
            );
        }
        s
    }
}
