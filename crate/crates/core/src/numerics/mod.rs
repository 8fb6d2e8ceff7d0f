//! Dense `f64` tensors, reverse-mode autodiff, AdamW and checkpoints.

pub mod checkpoint;
pub mod gradcheck;
pub mod graph;
pub mod optim;
pub mod params;
pub mod tensor;

pub use gradcheck::{finite_diff_check, refined_diff_check, GradCheck};
pub use graph::{Bound, Gradients, Graph, PairDistance, Var};
pub use optim::{AdamW, AdamWConfig};
pub use params::{ParamId, ParamSet};
pub use tensor::{cosine, cosine_similarity, Tensor};

/// Inverted dropout mask: kept units are scaled by `1 / (1 - p)`.
pub fn dropout_mask(n: usize, p: f64, rng: &mut crate::rng::Rng) -> Vec<f64> {
    use rand::Rng as _;
    let keep = 1.0 / (1.0 - p);
    (0..n).map(|_| if rng.gen::<f64>() < p { 0.0 } else { keep }).collect()
}
