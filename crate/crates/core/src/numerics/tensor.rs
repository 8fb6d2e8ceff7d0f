//! Dense row-major `f64` tensors and the forward kernels shared with the
//! autodiff graph.

use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Result};

/// Layer-norm variance guard.
pub const LN_EPS: f64 = 1e-5;
/// Cosine-similarity denominator guard.
pub const COS_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(dim_err(
                "Tensor::new",
                format!("shape {shape:?} holds {n} values, got {}", data.len()),
            ));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        let n = shape.iter().product();
        Self {
            shape: shape.to_vec(),
            data: vec![0.0; n],
        }
    }

    pub fn full(shape: &[usize], value: f64) -> Self {
        let n = shape.iter().product();
        Self {
            shape: shape.to_vec(),
            data: vec![value; n],
        }
    }

    pub fn scalar(v: f64) -> Self {
        Self {
            shape: vec![1],
            data: vec![v],
        }
    }

    pub fn vector(data: Vec<f64>) -> Self {
        Self {
            shape: vec![data.len()],
            data,
        }
    }

    pub fn row(data: Vec<f64>) -> Self {
        Self {
            shape: vec![1, data.len()],
            data,
        }
    }

    /// Builds an `rows x cols` matrix from row slices of equal length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(dim_err("Tensor::from_rows", "ragged rows"));
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            shape: vec![rows.len(), cols],
            data,
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Rows of the matrix view: the last axis is the column axis, everything
    /// before it is flattened into rows.
    pub fn rows(&self) -> usize {
        if self.shape.len() <= 1 {
            1
        } else {
            self.shape[..self.shape.len() - 1].iter().product()
        }
    }

    pub fn cols(&self) -> usize {
        self.shape.last().copied().unwrap_or(1)
    }

    pub fn row_slice(&self, i: usize) -> &[f64] {
        let c = self.cols();
        &self.data[i * c..(i + 1) * c]
    }

    pub fn item(&self) -> f64 {
        self.data[0]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn matmul(&self, other: &Tensor) -> Result<Tensor> {
        let (m, k) = (self.rows(), self.cols());
        let (k2, n) = (other.rows(), other.cols());
        if self.shape.len() != 2 || other.shape.len() != 2 || k != k2 {
            return Err(dim_err("matmul", format!("{:?} x {:?}", self.shape, other.shape)));
        }
        Ok(Tensor {
            shape: vec![m, n],
            data: matmul_kernel(&self.data, &other.data, m, k, n),
        })
    }

    /// Softmax along `axis` of a matrix (0 = down columns, 1 = along rows).
    pub fn softmax(&self, axis: usize) -> Result<Tensor> {
        match (self.shape.len(), axis) {
            (1, 0) => Ok(Tensor {
                shape: self.shape.clone(),
                data: softmax_rows(&self.data, 1, self.data.len()),
            }),
            (2, 1) => Ok(Tensor {
                shape: self.shape.clone(),
                data: softmax_rows(&self.data, self.rows(), self.cols()),
            }),
            (2, 0) => {
                let t = self.transpose();
                let s = softmax_rows(&t.data, t.rows(), t.cols());
                Ok(Tensor {
                    shape: t.shape.clone(),
                    data: s,
                }
                .transpose())
            }
            _ => Err(dim_err(
                "softmax",
                format!("axis {axis} invalid for shape {:?}", self.shape),
            )),
        }
    }

    pub fn transpose(&self) -> Tensor {
        let (r, c) = (self.rows(), self.cols());
        Tensor {
            shape: vec![c, r],
            data: transpose_kernel(&self.data, r, c),
        }
    }

    pub fn layer_norm(&self, gain: &Tensor, bias: &Tensor) -> Result<Tensor> {
        let c = self.cols();
        if gain.len() != c || bias.len() != c {
            return Err(dim_err("layer_norm", "gain/bias must match last axis"));
        }
        let (out, _, _) = layer_norm_kernel(&self.data, self.rows(), c, &gain.data, &bias.data);
        Ok(Tensor {
            shape: self.shape.clone(),
            data: out,
        })
    }

    pub fn relu(&self) -> Tensor {
        self.map(|v| v.max(0.0))
    }

    pub fn leaky_relu(&self, slope: f64) -> Tensor {
        self.map(|v| if v > 0.0 { v } else { slope * v })
    }

    pub fn sigmoid(&self) -> Tensor {
        self.map(sigmoid)
    }

    pub fn tanh(&self) -> Tensor {
        self.map(f64::tanh)
    }
}

/// Default slope of the leaky ReLU.
pub const LEAKY_SLOPE: f64 = 0.01;

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `log(sigmoid(x))` without overflow.
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `dot(x, y) / max(|x||y|, 1e-12)` clamped to `[-1, 1]`; a zero vector
/// gives 0.
pub fn cosine(x: &[f64], y: &[f64]) -> f64 {
    (dot(x, y) / (norm(x) * norm(y)).max(COS_EPS)).clamp(-1.0, 1.0)
}

pub fn cosine_similarity(x: &Tensor, y: &Tensor) -> Result<f64> {
    if x.len() != y.len() {
        return Err(dim_err("cosine_similarity", format!("{} vs {}", x.len(), y.len())));
    }
    Ok(cosine(&x.data, &y.data))
}

pub(crate) fn matmul_kernel(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        let orow = &mut out[i * n..(i + 1) * n];
        for p in 0..k {
            let av = a[i * k + p];
            if av == 0.0 {
                continue;
            }
            let brow = &b[p * n..(p + 1) * n];
            for (o, bv) in orow.iter_mut().zip(brow) {
                *o += av * bv;
            }
        }
    }
    out
}

pub(crate) fn transpose_kernel(a: &[f64], r: usize, c: usize) -> Vec<f64> {
    let mut out = vec![0.0; r * c];
    for i in 0..r {
        for j in 0..c {
            out[j * r + i] = a[i * c + j];
        }
    }
    out
}

pub(crate) fn softmax_rows(x: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; rows * cols];
    for i in 0..rows {
        let xr = &x[i * cols..(i + 1) * cols];
        let or = &mut out[i * cols..(i + 1) * cols];
        let mx = xr.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut s = 0.0;
        for (o, &v) in or.iter_mut().zip(xr) {
            *o = (v - mx).exp();
            s += *o;
        }
        for o in or.iter_mut() {
            *o /= s;
        }
    }
    out
}

/// Returns `(output, normalized, inv_std per row)`.
pub(crate) fn layer_norm_kernel(
    x: &[f64],
    rows: usize,
    cols: usize,
    gain: &[f64],
    bias: &[f64],
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut out = vec![0.0; rows * cols];
    let mut xhat = vec![0.0; rows * cols];
    let mut inv = vec![0.0; rows];
    for i in 0..rows {
        let xr = &x[i * cols..(i + 1) * cols];
        let mean = xr.iter().sum::<f64>() / cols as f64;
        let var = xr.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / cols as f64;
        let is = 1.0 / (var + LN_EPS).sqrt();
        inv[i] = is;
        for j in 0..cols {
            let h = (xr[j] - mean) * is;
            xhat[i * cols + j] = h;
            out[i * cols + j] = h * gain[j] + bias[j];
        }
    }
    (out, xhat, inv)
}
