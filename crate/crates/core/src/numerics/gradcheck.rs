//! Central finite-difference verification of graph gradients.

use super::graph::{Bound, Graph, Var};
use super::params::ParamSet;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheck {
    pub max_rel_error: f64,
    pub worst_index: usize,
    pub analytic: f64,
    pub numeric: f64,
}

/// Compares `backward` against `(f(p+h) - f(p-h)) / 2h` for every scalar of
/// `params`. The relative error of a coordinate is
/// `|a - n| / max(|a|, |n|, 1e-8)`; the maximum is returned.
///
/// `f` builds the loss on a fresh graph from bound parameters and must be
/// deterministic.
pub fn finite_diff_check<F>(f: F, params: &ParamSet, h: f64) -> Result<GradCheck>
where
    F: Fn(&mut Graph, &Bound) -> Result<Var>,
{
    let mut g = Graph::new();
    let bound = g.bind(params, true);
    let loss = f(&mut g, &bound)?;
    let analytic: Vec<f64> = g
        .backward(loss)?
        .collect(&bound, params)
        .into_iter()
        .flat_map(|t| t.into_data())
        .collect();

    let eval = |p: &ParamSet| -> Result<f64> {
        let mut g = Graph::new();
        let bound = g.bind(p, false);
        let loss = f(&mut g, &bound)?;
        g.check_finite()?;
        Ok(g.scalar(loss))
    };

    let base = params.flat();
    let mut probe = params.clone();
    let mut flat = base.clone();
    let mut worst = GradCheck {
        max_rel_error: 0.0,
        worst_index: 0,
        analytic: 0.0,
        numeric: 0.0,
    };
    for i in 0..base.len() {
        flat[i] = base[i] + h;
        probe.set_flat(&flat);
        let up = eval(&probe)?;
        flat[i] = base[i] - h;
        probe.set_flat(&flat);
        let down = eval(&probe)?;
        flat[i] = base[i];
        let numeric = (up - down) / (2.0 * h);
        let a = analytic[i];
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
        if rel > worst.max_rel_error || i == 0 {
            worst = GradCheck {
                max_rel_error: rel,
                worst_index: i,
                analytic: a,
                numeric,
            };
        }
    }
    Ok(worst)
}

/// Ridders' extrapolated central difference of `eval` along coordinate `i`,
/// starting from step `h0`. Returns `(estimate, error_estimate)`.
fn ridders<E>(eval: &E, base: &[f64], probe: &mut ParamSet, i: usize, h0: f64) -> Result<(f64, f64)>
where
    E: Fn(&ParamSet) -> Result<f64>,
{
    const CON: f64 = 1.4;
    const CON2: f64 = CON * CON;
    const NTAB: usize = 10;
    const SAFE: f64 = 2.0;
    let mut flat = base.to_vec();
    let mut central = |h: f64| -> Result<f64> {
        flat[i] = base[i] + h;
        probe.set_flat(&flat);
        let up = eval(probe)?;
        flat[i] = base[i] - h;
        probe.set_flat(&flat);
        let down = eval(probe)?;
        flat[i] = base[i];
        Ok((up - down) / (2.0 * h))
    };
    let mut a = [[0.0f64; NTAB]; NTAB];
    let mut h = h0;
    a[0][0] = central(h)?;
    let (mut ans, mut err) = (a[0][0], f64::INFINITY);
    for k in 1..NTAB {
        h /= CON;
        a[0][k] = central(h)?;
        let mut fac = CON2;
        for j in 1..=k {
            a[j][k] = (a[j - 1][k] * fac - a[j - 1][k - 1]) / (fac - 1.0);
            fac *= CON2;
            let e = (a[j][k] - a[j - 1][k]).abs().max((a[j][k] - a[j - 1][k - 1]).abs());
            if e <= err {
                err = e;
                ans = a[j][k];
            }
        }
        if (a[k][k] - a[k - 1][k - 1]).abs() >= SAFE * err {
            break;
        }
    }
    Ok((ans, err))
}

/// Like [`finite_diff_check`], but a coordinate whose plain central
/// difference at `h` disagrees by more than `tol` is re-estimated with
/// Ridders' extrapolation from step `h0`. That coordinate's error is the
/// smaller of the two. Plain central differences bottom out at roughly
/// `eps * |f| / h` in absolute terms, which swamps gradients below about
/// `1e-7` for losses of order one.
pub fn refined_diff_check<F>(f: F, params: &ParamSet, h: f64, h0: f64, tol: f64) -> Result<GradCheck>
where
    F: Fn(&mut Graph, &Bound) -> Result<Var>,
{
    let mut g = Graph::new();
    let bound = g.bind(params, true);
    let loss = f(&mut g, &bound)?;
    let analytic: Vec<f64> = g
        .backward(loss)?
        .collect(&bound, params)
        .into_iter()
        .flat_map(|t| t.into_data())
        .collect();
    let eval = |p: &ParamSet| -> Result<f64> {
        let mut g = Graph::new();
        let bound = g.bind(p, false);
        let loss = f(&mut g, &bound)?;
        g.check_finite()?;
        Ok(g.scalar(loss))
    };
    let rel = |a: f64, n: f64| (a - n).abs() / a.abs().max(n.abs()).max(1e-8);
    let base = params.flat();
    let mut probe = params.clone();
    let mut worst = GradCheck {
        max_rel_error: 0.0,
        worst_index: 0,
        analytic: 0.0,
        numeric: 0.0,
    };
    for i in 0..base.len() {
        let mut flat = base.clone();
        flat[i] = base[i] + h;
        probe.set_flat(&flat);
        let up = eval(&probe)?;
        flat[i] = base[i] - h;
        probe.set_flat(&flat);
        let down = eval(&probe)?;
        let a = analytic[i];
        let mut numeric = (up - down) / (2.0 * h);
        let mut err = rel(a, numeric);
        if err >= tol {
            let (r, _) = ridders(&eval, &base, &mut probe, i, h0)?;
            if rel(a, r) < err {
                err = rel(a, r);
                numeric = r;
            }
        }
        if err > worst.max_rel_error || i == 0 {
            worst = GradCheck {
                max_rel_error: err,
                worst_index: i,
                analytic: a,
                numeric,
            };
        }
    }
    Ok(worst)
}
