//! Masking and the generator / discriminator objectives.

use rand::seq::index;

use super::config::DistanceFn;
use crate::error::{contract, dim_err, Result};
use crate::numerics::{Graph, PairDistance, Tensor, Var};
use crate::rng::Rng;

/// Number of events masked in a day of `n` events: `max(1, round(k n))`,
/// never more than `n`.
pub fn mask_count(n: usize, k: f64) -> usize {
    ((k * n as f64).round() as usize).clamp(1, n.max(1))
}

/// Draws the masked positions (sorted) uniformly without replacement.
pub fn mask_indices(n: usize, k: f64, rng: &mut Rng) -> Vec<usize> {
    if n == 0 {
        return Vec::new();
    }
    let mut idx = index::sample(rng, n, mask_count(n, k)).into_vec();
    idx.sort_unstable();
    idx
}

/// Returns `(V_mask, masked_indices)`: `events` with the masked rows replaced
/// by `mask_vector`, all other rows untouched.
pub fn mask_events(events: &Tensor, k: f64, mask_vector: &[f64], rng: &mut Rng) -> Result<(Tensor, Vec<usize>)> {
    let (n, d) = (events.rows(), events.cols());
    if n == 0 || events.is_empty() {
        return Err(contract("mask_events needs at least one event"));
    }
    if mask_vector.len() != d {
        return Err(dim_err("mask_events", "mask vector width differs from events"));
    }
    let idx = mask_indices(n, k, rng);
    let mut data = events.data().to_vec();
    for &i in &idx {
        data[i * d..(i + 1) * d].copy_from_slice(mask_vector);
    }
    Ok((Tensor::new(events.shape().to_vec(), data)?, idx))
}

/// `sum_{e masked} 1 - cos(v_e, v_hat_e)` over full `n x d` inputs.
pub fn reconstruction_loss_elementwise(g: &mut Graph, targets: Var, outputs: Var, masked: &[usize]) -> Result<Var> {
    if masked.is_empty() {
        return Err(contract("reconstruction loss needs at least one masked event"));
    }
    let t = g.select_rows(targets, masked)?;
    let o = g.select_rows(outputs, masked)?;
    let d = g.row_distance(t, o, PairDistance::Cosine)?;
    Ok(g.sum(d))
}

/// Smoothed set distance between the masked targets and their
/// reconstructions (both `m x d`):
/// `1/2 [mean_e min_e' d(v_e, v_hat_e') + mean_e min_e' d(v_hat_e, v_e')]`.
pub fn hausdorff_loss(g: &mut Graph, targets: Var, outputs: Var, dist: DistanceFn) -> Result<Var> {
    let (mt, mo) = (g.value(targets).rows(), g.value(outputs).rows());
    if mt != mo {
        return Err(contract(format!("hausdorff_loss set sizes differ: {mt} vs {mo}")));
    }
    if mt == 0 || g.value(targets).is_empty() {
        return Err(contract("hausdorff_loss needs non-empty sets"));
    }
    let dm = g.pairwise(targets, outputs, dist.pair_distance())?;
    let to_out = g.row_min(dm);
    let out_to = g.col_min(dm);
    let a = g.mean(to_out);
    let b = g.mean(out_to);
    let s = g.add(a, b)?;
    Ok(g.scale(s, 0.5))
}

/// Value of [`hausdorff_loss`] on plain tensors.
pub fn hausdorff_value(targets: &Tensor, outputs: &Tensor, dist: DistanceFn) -> Result<f64> {
    let mut g = Graph::new();
    let t = g.constant(targets.clone());
    let o = g.constant(outputs.clone());
    let l = hausdorff_loss(&mut g, t, o, dist)?;
    Ok(g.scalar(l))
}

/// Value of [`reconstruction_loss_elementwise`] on plain tensors.
pub fn elementwise_value(targets: &Tensor, outputs: &Tensor, masked: &[usize]) -> Result<f64> {
    let mut g = Graph::new();
    let t = g.constant(targets.clone());
    let o = g.constant(outputs.clone());
    let l = reconstruction_loss_elementwise(&mut g, t, o, masked)?;
    Ok(g.scalar(l))
}

/// Reconstruction term on the masked rows, Hausdorff or position-wise.
pub fn reconstruction_term(
    g: &mut Graph,
    v: Var,
    v_hat: Var,
    masked: &[usize],
    use_hausdorff: bool,
    dist: DistanceFn,
) -> Result<Var> {
    if use_hausdorff {
        let t = g.select_rows(v, masked)?;
        let o = g.select_rows(v_hat, masked)?;
        hausdorff_loss(g, t, o, dist)
    } else {
        reconstruction_loss_elementwise(g, v, v_hat, masked)
    }
}

/// `(d_loss, g_loss)` from discriminator logits on the real day and on the
/// day with reconstructions substituted.
///
/// `d_loss = -[log D(real) + log(1 - D(gen))]`. The generator loss is
/// `-log D(gen)`, or the literal minimax `log(1 - D(gen))` when
/// `saturating` is set.
pub fn adversarial_losses(g: &mut Graph, logit_real: Var, logit_gen: Var, saturating: bool) -> Result<(Var, Var)> {
    let lr = g.log_sigmoid(logit_real);
    let neg_gen = g.scale(logit_gen, -1.0);
    let lf = g.log_sigmoid(neg_gen);
    let s = g.add(lr, lf)?;
    let d_loss = g.scale(s, -1.0);
    let g_loss = if saturating {
        lf
    } else {
        let l = g.log_sigmoid(logit_gen);
        g.scale(l, -1.0)
    };
    Ok((d_loss, g_loss))
}

/// [`adversarial_losses`] on probabilities rather than logits.
pub fn adversarial_from_probs(d_real: f64, d_gen: f64) -> (f64, f64) {
    let d_loss = -(d_real.ln() + (1.0 - d_gen).ln());
    let g_loss = -d_gen.ln();
    (d_loss, g_loss)
}
