//! Anomalous-day selection and error metrics restricted to those days.

use crate::error::{contract, Result};

/// Indices of the `k` largest residuals inside `range`, ranked by absolute
/// value (or by signed value when `signed` is set). Ties go to the earlier
/// day. The result is in rank order.
pub fn top_k_anomalies(residual: &[f64], range: std::ops::Range<usize>, k: usize, signed: bool) -> Result<Vec<usize>> {
    if range.end > residual.len() {
        return Err(contract("anomaly range exceeds residual length"));
    }
    if k > range.len() {
        return Err(contract(format!("K = {k} exceeds the {} days available", range.len())));
    }
    let score = |i: usize| if signed { residual[i] } else { residual[i].abs() };
    let mut idx: Vec<usize> = range.collect();
    idx.sort_by(|a, b| score(*b).total_cmp(&score(*a)).then(a.cmp(b)));
    idx.truncate(k);
    Ok(idx)
}

fn check(y: &[f64], yhat: &[f64], days: &[usize]) -> Result<()> {
    if days.is_empty() {
        return Err(contract("empty anomaly day set"));
    }
    if y.len() != yhat.len() {
        return Err(contract("actual and predicted series differ in length"));
    }
    if days.iter().any(|d| *d >= y.len()) {
        return Err(contract("anomaly day outside the series"));
    }
    Ok(())
}

pub fn mae_at_k(y: &[f64], yhat: &[f64], days: &[usize]) -> Result<f64> {
    check(y, yhat, days)?;
    Ok(days.iter().map(|d| (y[*d] - yhat[*d]).abs()).sum::<f64>() / days.len() as f64)
}

/// `None` when the actual values on `days` sum to zero.
pub fn wmape_at_k(y: &[f64], yhat: &[f64], days: &[usize]) -> Result<Option<f64>> {
    check(y, yhat, days)?;
    let den: f64 = days.iter().map(|d| y[*d].abs()).sum();
    if den == 0.0 {
        return Ok(None);
    }
    Ok(Some(days.iter().map(|d| (y[*d] - yhat[*d]).abs()).sum::<f64>() / den))
}
