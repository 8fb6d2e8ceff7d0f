//! Reference computations written independently of the library code.

use gan_event_core::gan::loss::reconstruction_term;
use gan_event_core::gan::{
    adversarial_losses, mask_indices, reconstruction_loss_elementwise, Discriminator, DistanceFn, Generator,
};
use gan_event_core::numerics::{refined_diff_check, Bound, Graph, Tensor};
use gan_event_core::rng;

use super::{random_tensor, tiny_model};

pub fn distance(x: &[f64], y: &[f64], dist: DistanceFn) -> f64 {
    match dist {
        DistanceFn::Cosine => {
            let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
            let nx = x.iter().map(|a| a * a).sum::<f64>().sqrt();
            let ny = y.iter().map(|a| a * a).sum::<f64>().sqrt();
            1.0 - dot / (nx * ny)
        }
        DistanceFn::L1 => x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum(),
        DistanceFn::L2 => x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum(),
    }
}

/// Half the sum of the mean row minimum and mean column minimum of the full
/// `m x m` distance matrix.
pub fn hausdorff(t: &Tensor, o: &Tensor, dist: DistanceFn) -> f64 {
    let m = t.rows();
    let d: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..m).map(|j| distance(t.row_slice(i), o.row_slice(j), dist)).collect())
        .collect();
    let rows: f64 = d.iter().map(|r| r.iter().copied().fold(f64::INFINITY, f64::min)).sum();
    let cols: f64 = (0..m)
        .map(|j| (0..m).map(|i| d[i][j]).fold(f64::INFINITY, f64::min))
        .sum();
    0.5 * (rows / m as f64 + cols / m as f64)
}

/// One-tailed sign-flip p-value for `mean(a) < mean(b)`, enumerating every
/// sign vector explicitly and computing t from scratch.
pub fn sign_flip_p(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    let t = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / n as f64;
        let s = (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n as f64 - 1.0)).sqrt();
        m / (s / (n as f64).sqrt())
    };
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let obs = t(&d);
    let mut hits = 0usize;
    for mask in 0..1usize << n {
        let v: Vec<f64> = (0..n).map(|i| if mask >> i & 1 == 1 { -d[i] } else { d[i] }).collect();
        if t(&v) <= obs + 1e-12 {
            hits += 1;
        }
    }
    hits as f64 / (1usize << n) as f64
}

pub const GRAD_TOL: f64 = 1e-4;
pub const GRAD_STEP: f64 = 1e-5;
/// Starting step of the extrapolated re-check for coordinates at the
/// central-difference roundoff floor.
pub const RIDDERS_STEP: f64 = 1e-3;

fn check(
    f: impl Fn(&mut Graph, &Bound) -> gan_event_core::Result<gan_event_core::numerics::Var>,
    p: &gan_event_core::ParamSet,
) -> f64 {
    refined_diff_check(f, p, GRAD_STEP, RIDDERS_STEP, GRAD_TOL)
        .unwrap()
        .max_rel_error
}

/// Worst relative gradient error of every training loss on a tiny random
/// generator/discriminator pair, labelled by loss.
pub fn model_loss_errors(seed: u64) -> Vec<(String, f64)> {
    let mut r = rng::stream(seed, "test/model-case");
    let cfg = tiny_model();
    let gen = Generator::new(cfg, &mut r).unwrap();
    let disc = Discriminator::new(cfg, &mut r).unwrap();
    assert!(gen.params.num_scalars() <= 200 && disc.params.num_scalars() <= 200);
    let n = 2 + (seed % 4) as usize;
    let events = random_tensor(&mut r, n, cfg.dim);
    let masked = mask_indices(n, 0.5, &mut r);
    let mut out = Vec::new();

    let elementwise = |g: &mut Graph, p: &Bound| {
        let v = g.constant(events.clone());
        let (_, vh) = gen.forward_masked(g, p, v, &masked, None)?;
        reconstruction_loss_elementwise(g, v, vh, &masked)
    };
    out.push(("elementwise".to_string(), check(elementwise, &gen.params)));
    for dist in DistanceFn::ALL {
        let f = |g: &mut Graph, p: &Bound| {
            let v = g.constant(events.clone());
            let (_, vh) = gen.forward_masked(g, p, v, &masked, None)?;
            reconstruction_term(g, v, vh, &masked, true, dist)
        };
        out.push((format!("hausdorff-{dist}"), check(f, &gen.params)));
    }

    let logits = |g: &mut Graph, gp: &Bound, dp: &Bound| {
        let v = g.constant(events.clone());
        let (_, vh) = gen.forward_masked(g, gp, v, &masked, None)?;
        let vg = g.scatter_rows(v, vh, &masked)?;
        let zr = disc.logit(g, dp, v, None)?;
        let zg = disc.logit(g, dp, vg, None)?;
        Ok::<_, gan_event_core::Error>((zr, zg))
    };
    let d = |g: &mut Graph, dp: &Bound| {
        let gp = g.bind(&gen.params, false);
        let (zr, zg) = logits(g, &gp, dp)?;
        Ok(adversarial_losses(g, zr, zg, false)?.0)
    };
    out.push(("d_loss".to_string(), check(d, &disc.params)));
    for saturating in [false, true] {
        let gl = |g: &mut Graph, gp: &Bound| {
            let dp = g.bind(&disc.params, false);
            let (zr, zg) = logits(g, gp, &dp)?;
            Ok(adversarial_losses(g, zr, zg, saturating)?.1)
        };
        let label = if saturating { "g_loss-saturating" } else { "g_loss" };
        out.push((label.to_string(), check(gl, &gen.params)));
    }
    out
}

/// Worst relative gradient error of the cosine set loss through a
/// two-layer generator. Width 3 keeps layer norm non-degenerate; over two
/// features it maps every input to +-1 and flattens upstream gradients.
pub fn two_layer_error(seed: u64) -> f64 {
    let mut cfg = tiny_model();
    cfg.dim = 2;
    cfg.encoder.model_dim = 3;
    cfg.encoder.heads = 3;
    cfg.encoder.ff_dim = 2;
    cfg.encoder.layers = 2;
    let mut r = rng::stream(seed, "test/two-layer");
    let gen = Generator::new(cfg, &mut r).unwrap();
    assert!(gen.params.num_scalars() <= 200);
    let events = random_tensor(&mut r, 4, cfg.dim);
    let masked = mask_indices(4, 0.5, &mut r);
    let f = |g: &mut Graph, p: &Bound| {
        let v = g.constant(events.clone());
        let (_, vh) = gen.forward_masked(g, p, v, &masked, None)?;
        reconstruction_term(g, v, vh, &masked, true, DistanceFn::Cosine)
    };
    check(f, &gen.params)
}
