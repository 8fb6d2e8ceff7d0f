use std::ops::Index;

use rand::Rng as _;
use rand_distr::{Distribution, Normal};

use super::tensor::Tensor;
use crate::error::{contract, Result};
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ParamId(pub(crate) usize);

impl ParamId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Named, ordered parameter tensors. The order is the checkpoint manifest
/// order and the order of gradient vectors handed to the optimizer.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamSet {
    names: Vec<String>,
    tensors: Vec<Tensor>,
}

impl ParamSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, tensor: Tensor) -> ParamId {
        self.names.push(name.into());
        self.tensors.push(tensor);
        ParamId(self.tensors.len() - 1)
    }

    /// Xavier-uniform `fan_in x fan_out` weight matrix.
    pub fn add_xavier(&mut self, name: &str, fan_in: usize, fan_out: usize, rng: &mut Rng) -> ParamId {
        let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let data = (0..fan_in * fan_out).map(|_| rng.gen_range(-a..a)).collect();
        let t = Tensor::new(vec![fan_in, fan_out], data).expect("shape");
        self.add(name, t)
    }

    pub fn add_normal(&mut self, name: &str, shape: &[usize], sd: f64, rng: &mut Rng) -> ParamId {
        let n: usize = shape.iter().product();
        let dist = Normal::new(0.0, sd).expect("sd");
        let data = (0..n).map(|_| dist.sample(rng)).collect();
        self.add(name, Tensor::new(shape.to_vec(), data).expect("shape"))
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    /// Total scalar count across all tensors.
    pub fn num_scalars(&self) -> usize {
        self.tensors.iter().map(Tensor::len).sum()
    }

    pub fn get(&self, id: ParamId) -> &Tensor {
        &self.tensors[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.tensors[id.0]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> &mut [Tensor] {
        &mut self.tensors
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.names.iter().map(String::as_str).zip(&self.tensors)
    }

    pub fn find(&self, name: &str) -> Option<ParamId> {
        self.names.iter().position(|n| n == name).map(ParamId)
    }

    /// Copies values from `other`, which must carry the same manifest.
    pub fn load_from(&mut self, other: &ParamSet) -> Result<()> {
        if self.names != other.names
            || self
                .tensors
                .iter()
                .zip(&other.tensors)
                .any(|(a, b)| a.shape() != b.shape())
        {
            return Err(contract("parameter manifest mismatch"));
        }
        self.tensors.clone_from(&other.tensors);
        Ok(())
    }

    /// Flattened view of every scalar, in manifest order.
    pub fn flat(&self) -> Vec<f64> {
        self.tensors.iter().flat_map(|t| t.data().iter().copied()).collect()
    }

    pub fn set_flat(&mut self, values: &[f64]) {
        let mut off = 0;
        for t in &mut self.tensors {
            let n = t.len();
            t.data_mut().copy_from_slice(&values[off..off + n]);
            off += n;
        }
    }
}

impl Index<ParamId> for ParamSet {
    type Output = Tensor;

    fn index(&self, id: ParamId) -> &Tensor {
        &self.tensors[id.0]
    }
}
