#![allow(dead_code)]

pub mod oracles;

use gan_event_core::gan::{EncoderConfig, ModelConfig};
use gan_event_core::numerics::Tensor;
use gan_event_core::rng::Rng;
use rand::Rng as _;

/// All permutations of `0..n` (Heap's algorithm).
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn heap(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        for i in 0..k - 1 {
            heap(k - 1, a, out);
            if k.is_multiple_of(2) {
                a.swap(i, k - 1);
            } else {
                a.swap(0, k - 1);
            }
        }
        heap(k - 1, a, out);
    }
    let mut a: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    heap(n, &mut a, &mut out);
    out
}

pub fn random_tensor(rng: &mut Rng, rows: usize, cols: usize) -> Tensor {
    let data = (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Tensor::new(vec![rows, cols], data).unwrap()
}

pub fn permute_rows(t: &Tensor, perm: &[usize]) -> Tensor {
    let rows: Vec<&[f64]> = perm.iter().map(|&i| t.row_slice(i)).collect();
    Tensor::from_rows(&rows).unwrap()
}

/// Model small enough for finite-difference checks (< 200 scalars each).
pub fn tiny_model() -> ModelConfig {
    ModelConfig {
        dim: 3,
        encoder: EncoderConfig {
            model_dim: 4,
            heads: 2,
            ff_dim: 4,
            layers: 1,
            dropout: 0.0,
        },
    }
}

/// Desk-scale model used by the behavioural tests.
pub fn small_model(dim: usize) -> ModelConfig {
    ModelConfig {
        dim,
        encoder: EncoderConfig {
            model_dim: 16,
            heads: 4,
            ff_dim: 32,
            layers: 2,
            dropout: 0.0,
        },
    }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
