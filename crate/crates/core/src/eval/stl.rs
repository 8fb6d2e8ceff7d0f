//! Moving-average seasonal-trend decomposition.

use crate::error::{contract, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub trend: Vec<f64>,
    pub seasonal: Vec<f64>,
    pub residual: Vec<f64>,
}

/// Centered moving average over one period. Even periods use the 2xP
/// filter with half weights on both ends. Positions the window cannot
/// cover take the nearest computed value.
pub fn centered_moving_average(x: &[f64], period: usize) -> Vec<f64> {
    let n = x.len();
    let half = period / 2;
    if n < 2 * half + 1 {
        let m = x.iter().sum::<f64>() / n.max(1) as f64;
        return vec![m; n];
    }
    let mut out = vec![0.0; n];
    for t in half..n - half {
        out[t] = if period % 2 == 1 {
            x[t - half..=t + half].iter().sum::<f64>() / period as f64
        } else {
            let inner: f64 = x[t - half + 1..t + half].iter().sum();
            (inner + 0.5 * (x[t - half] + x[t + half])) / period as f64
        };
    }
    let (lo, hi) = (out[half], out[n - half - 1]);
    out[..half].fill(lo);
    out[n - half..].fill(hi);
    out
}

/// Mean of `x` per phase `t mod period`, shifted to sum to zero.
fn phase_means(x: &[f64], period: usize, range: std::ops::Range<usize>) -> Vec<f64> {
    let mut sum = vec![0.0; period];
    let mut cnt = vec![0usize; period];
    for t in range {
        sum[t % period] += x[t];
        cnt[t % period] += 1;
    }
    let mut means: Vec<f64> = sum
        .iter()
        .zip(&cnt)
        .map(|(s, c)| if *c > 0 { s / *c as f64 } else { 0.0 })
        .collect();
    let centre = means.iter().sum::<f64>() / period as f64;
    for m in &mut means {
        *m -= centre;
    }
    means
}

/// Splits `x` into trend, a zero-mean seasonal profile of length `period`
/// repeated over the series, and the residual. With `yearly` set, a second
/// profile of that period is removed from the remainder when the series
/// covers two full cycles of it.
pub fn stl_decompose(x: &[f64], period: usize, yearly: Option<usize>) -> Result<Decomposition> {
    if period < 2 {
        return Err(contract("period must be >= 2"));
    }
    if x.len() < 2 * period {
        return Err(contract(format!(
            "series of length {} is shorter than two periods",
            x.len()
        )));
    }
    let n = x.len();
    let trend = centered_moving_average(x, period);
    let detrended: Vec<f64> = x.iter().zip(&trend).map(|(a, b)| a - b).collect();
    let half = period / 2;
    let prof = phase_means(&detrended, period, half..n - half);
    let mut seasonal: Vec<f64> = (0..n).map(|t| prof[t % period]).collect();
    if let Some(yp) = yearly.filter(|yp| n >= 2 * yp) {
        let rest: Vec<f64> = detrended.iter().zip(&seasonal).map(|(d, s)| d - s).collect();
        let yprof = phase_means(&rest, yp, 0..n);
        for (t, s) in seasonal.iter_mut().enumerate() {
            *s += yprof[t % yp];
        }
    }
    let residual = (0..n).map(|t| x[t] - trend[t] - seasonal[t]).collect();
    Ok(Decomposition {
        trend,
        seasonal,
        residual,
    })
}
