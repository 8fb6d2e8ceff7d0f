//! One-tailed paired permutation test by sign flips of the differences.

use rand::Rng as _;

use crate::error::{contract, Result};
use crate::rng;

pub const DEFAULT_RESAMPLES: usize = 10_000;

/// Paired t statistic of `diffs`. A zero spread gives `0` when every
/// difference is zero and an infinity of the mean's sign otherwise.
pub fn paired_t(diffs: &[f64]) -> f64 {
    let n = diffs.len() as f64;
    let mean = diffs.iter().sum::<f64>() / n;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    if se > 1e-14 * mean.abs() {
        mean / se
    } else if mean == 0.0 {
        0.0
    } else {
        mean.signum() * f64::INFINITY
    }
}

fn at_most(t: f64, obs: f64) -> bool {
    if obs.is_infinite() || t.is_infinite() {
        t <= obs
    } else {
        t <= obs + 1e-12 * obs.abs().max(1.0)
    }
}

/// p-value for `mean(a) < mean(b)`. Enumerates all `2^n` sign patterns
/// when that is no more than `n_resamples`; otherwise draws `n_resamples`
/// random patterns and applies the add-one correction.
pub fn paired_permutation_test(a: &[f64], b: &[f64], n_resamples: usize, seed: u64) -> Result<f64> {
    if a.len() != b.len() {
        return Err(contract(format!(
            "paired samples differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(contract("paired test needs at least two pairs"));
    }
    if n_resamples == 0 {
        return Err(contract("n_resamples must be positive"));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = d.len();
    let obs = paired_t(&d);
    let mut flipped = vec![0.0; n];
    if n < usize::BITS as usize && (1usize << n) <= n_resamples {
        let total = 1usize << n;
        let hits = (0..total)
            .filter(|mask| {
                for (i, f) in flipped.iter_mut().enumerate() {
                    *f = if mask >> i & 1 == 1 { -d[i] } else { d[i] };
                }
                at_most(paired_t(&flipped), obs)
            })
            .count();
        return Ok(hits as f64 / total as f64);
    }
    let mut r = rng::stream(seed, "eval/permutation");
    let mut hits = 0usize;
    for _ in 0..n_resamples {
        for (f, di) in flipped.iter_mut().zip(&d) {
            *f = if r.gen::<bool>() { -di } else { *di };
        }
        if at_most(paired_t(&flipped), obs) {
            hits += 1;
        }
    }
    Ok((hits + 1) as f64 / (n_resamples + 1) as f64)
}
