//! Reverse-mode automatic differentiation over a linear tape.
//!
//! Every op appends a node whose parents already live on the tape, so the
//! node order is a topological order and `backward` is a single reverse
//! sweep. All shapes are matrices (`rows x cols`); 1-D tensors are treated
//! as a single row.

use std::ops::Index;

use super::params::{ParamId, ParamSet};
use super::tensor::{
    layer_norm_kernel, log_sigmoid, matmul_kernel, sigmoid, softmax_rows, transpose_kernel, Tensor, COS_EPS,
};
use crate::error::{contract, dim_err, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Row-to-row distances usable inside the graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairDistance {
    /// `1 - cos(x, y)`
    Cosine,
    /// `sum |x - y|`
    L1,
    /// `sum (x - y)^2`
    SquaredL2,
}

#[derive(Debug)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    Transpose(Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    AddRow(Var, Var),
    Scale(Var, f64),
    AddScalar(Var),
    MulConst(Var, Vec<f64>),
    Sum(Var),
    Mean(Var),
    MeanRows(Var),
    SoftmaxRows(Var),
    LayerNorm {
        x: Var,
        gain: Var,
        bias: Var,
        xhat: Vec<f64>,
        inv_std: Vec<f64>,
    },
    Relu(Var),
    LeakyRelu(Var, f64),
    Sigmoid(Var),
    Tanh(Var),
    LogSigmoid(Var),
    SliceCols {
        x: Var,
        start: usize,
    },
    ConcatCols(Vec<Var>),
    ConcatRows(Vec<Var>),
    SelectRows {
        x: Var,
        idx: Vec<usize>,
    },
    ScatterRows {
        base: Var,
        src: Var,
        idx: Vec<usize>,
    },
    FillRows {
        base: Var,
        row: Var,
        idx: Vec<usize>,
    },
    Pairwise {
        a: Var,
        b: Var,
        kind: PairDistance,
    },
    RowDistance {
        a: Var,
        b: Var,
        kind: PairDistance,
    },
    RowMin {
        x: Var,
        arg: Vec<usize>,
    },
    ColMin {
        x: Var,
        arg: Vec<usize>,
    },
}

#[derive(Debug)]
struct Node {
    value: Tensor,
    requires_grad: bool,
    op: Op,
}

/// The computation tape.
#[derive(Debug, Default)]
pub struct Graph {
    nodes: Vec<Node>,
    non_finite: Option<String>,
}

/// Parameters bound onto a graph as leaves, indexable by [`ParamId`].
#[derive(Debug, Clone)]
pub struct Bound {
    vars: Vec<Var>,
}

impl Index<ParamId> for Bound {
    type Output = Var;

    fn index(&self, id: ParamId) -> &Var {
        &self.vars[id.index()]
    }
}

impl Bound {
    pub fn vars(&self) -> &[Var] {
        &self.vars
    }
}

/// Leaf gradients produced by [`Graph::backward`].
#[derive(Debug)]
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    pub fn get(&self, v: Var) -> Option<&Tensor> {
        self.grads.get(v.0).and_then(Option::as_ref)
    }

    /// One gradient per bound parameter, in manifest order; parameters the
    /// loss does not depend on get zeros.
    pub fn collect(&self, bound: &Bound, params: &ParamSet) -> Vec<Tensor> {
        bound
            .vars
            .iter()
            .zip(params.tensors())
            .map(|(v, p)| self.get(*v).cloned().unwrap_or_else(|| Tensor::zeros(p.shape())))
            .collect()
    }
}

fn shape2(r: usize, c: usize) -> Vec<usize> {
    vec![r, c]
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn scalar(&self, v: Var) -> f64 {
        self.nodes[v.0].value.item()
    }

    pub fn requires_grad(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    fn rc(&self, v: Var) -> (usize, usize) {
        let t = &self.nodes[v.0].value;
        (t.rows(), t.cols())
    }

    fn data(&self, v: Var) -> &[f64] {
        self.nodes[v.0].value.data()
    }

    fn push(&mut self, value: Tensor, requires_grad: bool, op: Op) -> Var {
        if self.non_finite.is_none() && !value.is_finite() {
            self.non_finite = Some(format!("{op:?}").chars().take(60).collect());
        }
        self.nodes.push(Node {
            value,
            requires_grad,
            op,
        });
        Var(self.nodes.len() - 1)
    }

    fn push2(&mut self, r: usize, c: usize, data: Vec<f64>, parents: &[Var], op: Op) -> Var {
        let rg = parents.iter().any(|p| self.nodes[p.0].requires_grad);
        self.push(Tensor::new(shape2(r, c), data).expect("op shape"), rg, op)
    }

    /// Returns an error if any forward value so far was NaN or infinite.
    pub fn check_finite(&self) -> Result<()> {
        match &self.non_finite {
            Some(op) => Err(Error::NonFinite(op.clone())),
            None => Ok(()),
        }
    }

    pub fn constant(&mut self, t: Tensor) -> Var {
        let (r, c) = (t.rows(), t.cols());
        let t = Tensor::new(shape2(r, c), t.into_data()).expect("shape");
        self.push(t, false, Op::Leaf)
    }

    pub fn leaf(&mut self, t: Tensor) -> Var {
        let (r, c) = (t.rows(), t.cols());
        let t = Tensor::new(shape2(r, c), t.into_data()).expect("shape");
        self.push(t, true, Op::Leaf)
    }

    /// Binds every parameter as a leaf. With `trainable = false` they are
    /// constants and receive no gradient.
    pub fn bind(&mut self, params: &ParamSet, trainable: bool) -> Bound {
        let vars = params
            .tensors()
            .iter()
            .map(|t| {
                if trainable {
                    self.leaf(t.clone())
                } else {
                    self.constant(t.clone())
                }
            })
            .collect();
        Bound { vars }
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (m, k) = self.rc(a);
        let (k2, n) = self.rc(b);
        if k != k2 {
            return Err(dim_err("matmul", format!("{m}x{k} by {k2}x{n}")));
        }
        let out = matmul_kernel(self.data(a), self.data(b), m, k, n);
        Ok(self.push2(m, n, out, &[a, b], Op::MatMul(a, b)))
    }

    pub fn transpose(&mut self, a: Var) -> Var {
        let (r, c) = self.rc(a);
        let out = transpose_kernel(self.data(a), r, c);
        self.push2(c, r, out, &[a], Op::Transpose(a))
    }

    fn same_shape(&self, op: &'static str, a: Var, b: Var) -> Result<(usize, usize)> {
        let (ra, ca) = self.rc(a);
        let (rb, cb) = self.rc(b);
        if (ra, ca) != (rb, cb) {
            return Err(dim_err(op, format!("{ra}x{ca} vs {rb}x{cb}")));
        }
        Ok((ra, ca))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let (r, c) = self.same_shape("add", a, b)?;
        let out = self.data(a).iter().zip(self.data(b)).map(|(x, y)| x + y).collect();
        Ok(self.push2(r, c, out, &[a, b], Op::Add(a, b)))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        let (r, c) = self.same_shape("sub", a, b)?;
        let out = self.data(a).iter().zip(self.data(b)).map(|(x, y)| x - y).collect();
        Ok(self.push2(r, c, out, &[a, b], Op::Sub(a, b)))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (r, c) = self.same_shape("mul", a, b)?;
        let out = self.data(a).iter().zip(self.data(b)).map(|(x, y)| x * y).collect();
        Ok(self.push2(r, c, out, &[a, b], Op::Mul(a, b)))
    }

    /// `x + bias` with `bias` broadcast over rows.
    pub fn add_row(&mut self, x: Var, bias: Var) -> Result<Var> {
        let (r, c) = self.rc(x);
        if self.nodes[bias.0].value.len() != c {
            return Err(dim_err("add_row", "bias must match column count"));
        }
        let b = self.data(bias);
        let out = self.data(x).iter().enumerate().map(|(i, v)| v + b[i % c]).collect();
        Ok(self.push2(r, c, out, &[x, bias], Op::AddRow(x, bias)))
    }

    /// `x W + b`.
    pub fn linear(&mut self, x: Var, weight: Var, bias: Var) -> Result<Var> {
        let y = self.matmul(x, weight)?;
        self.add_row(y, bias)
    }

    pub fn scale(&mut self, a: Var, s: f64) -> Var {
        let (r, c) = self.rc(a);
        let out = self.data(a).iter().map(|v| v * s).collect();
        self.push2(r, c, out, &[a], Op::Scale(a, s))
    }

    pub fn add_scalar(&mut self, a: Var, s: f64) -> Var {
        let (r, c) = self.rc(a);
        let out = self.data(a).iter().map(|v| v + s).collect();
        self.push2(r, c, out, &[a], Op::AddScalar(a))
    }

    /// Elementwise product with a constant of the same size (dropout masks).
    pub fn mul_const(&mut self, a: Var, k: Vec<f64>) -> Result<Var> {
        let (r, c) = self.rc(a);
        if k.len() != r * c {
            return Err(dim_err("mul_const", "constant size mismatch"));
        }
        let out = self.data(a).iter().zip(&k).map(|(x, y)| x * y).collect();
        Ok(self.push2(r, c, out, &[a], Op::MulConst(a, k)))
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let s = self.data(a).iter().sum();
        self.push2(1, 1, vec![s], &[a], Op::Sum(a))
    }

    pub fn mean(&mut self, a: Var) -> Var {
        let d = self.data(a);
        let s = d.iter().sum::<f64>() / d.len() as f64;
        self.push2(1, 1, vec![s], &[a], Op::Mean(a))
    }

    /// Mean over the row axis: `r x c -> 1 x c`.
    pub fn mean_rows(&mut self, a: Var) -> Var {
        let (r, c) = self.rc(a);
        let d = self.data(a);
        let mut out = vec![0.0; c];
        for i in 0..r {
            for j in 0..c {
                out[j] += d[i * c + j];
            }
        }
        for o in &mut out {
            *o /= r as f64;
        }
        self.push2(1, c, out, &[a], Op::MeanRows(a))
    }

    pub fn softmax_rows(&mut self, a: Var) -> Var {
        let (r, c) = self.rc(a);
        let out = softmax_rows(self.data(a), r, c);
        self.push2(r, c, out, &[a], Op::SoftmaxRows(a))
    }

    pub fn layer_norm(&mut self, x: Var, gain: Var, bias: Var) -> Result<Var> {
        let (r, c) = self.rc(x);
        if self.nodes[gain.0].value.len() != c || self.nodes[bias.0].value.len() != c {
            return Err(dim_err("layer_norm", "gain/bias must match last axis"));
        }
        let (out, xhat, inv_std) = layer_norm_kernel(self.data(x), r, c, self.data(gain), self.data(bias));
        Ok(self.push2(
            r,
            c,
            out,
            &[x, gain, bias],
            Op::LayerNorm {
                x,
                gain,
                bias,
                xhat,
                inv_std,
            },
        ))
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let (r, c) = self.rc(a);
        let out = self.data(a).iter().map(|v| v.max(0.0)).collect();
        self.push2(r, c, out, &[a], Op::Relu(a))
    }

    pub fn leaky_relu(&mut self, a: Var, slope: f64) -> Var {
        let (r, c) = self.rc(a);
        let out = self
            .data(a)
            .iter()
            .map(|&v| if v > 0.0 { v } else { slope * v })
            .collect();
        self.push2(r, c, out, &[a], Op::LeakyRelu(a, slope))
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let (r, c) = self.rc(a);
        let out = self.data(a).iter().map(|&v| sigmoid(v)).collect();
        self.push2(r, c, out, &[a], Op::Sigmoid(a))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let (r, c) = self.rc(a);
        let out = self.data(a).iter().map(|v| v.tanh()).collect();
        self.push2(r, c, out, &[a], Op::Tanh(a))
    }

    /// `log(sigmoid(a))`, stable for large `|a|`.
    pub fn log_sigmoid(&mut self, a: Var) -> Var {
        let (r, c) = self.rc(a);
        let out = self.data(a).iter().map(|&v| log_sigmoid(v)).collect();
        self.push2(r, c, out, &[a], Op::LogSigmoid(a))
    }

    pub fn slice_cols(&mut self, x: Var, start: usize, len: usize) -> Result<Var> {
        let (r, c) = self.rc(x);
        if start + len > c {
            return Err(dim_err("slice_cols", format!("{start}+{len} > {c}")));
        }
        let d = self.data(x);
        let mut out = Vec::with_capacity(r * len);
        for i in 0..r {
            out.extend_from_slice(&d[i * c + start..i * c + start + len]);
        }
        Ok(self.push2(r, len, out, &[x], Op::SliceCols { x, start }))
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var> {
        let r = self.rc(parts[0]).0;
        if parts.iter().any(|p| self.rc(*p).0 != r) {
            return Err(dim_err("concat_cols", "row counts differ"));
        }
        let c: usize = parts.iter().map(|p| self.rc(*p).1).sum();
        let mut out = Vec::with_capacity(r * c);
        for i in 0..r {
            for p in parts {
                let pc = self.rc(*p).1;
                out.extend_from_slice(&self.data(*p)[i * pc..(i + 1) * pc]);
            }
        }
        Ok(self.push2(r, c, out, parts, Op::ConcatCols(parts.to_vec())))
    }

    pub fn concat_rows(&mut self, parts: &[Var]) -> Result<Var> {
        let c = self.rc(parts[0]).1;
        if parts.iter().any(|p| self.rc(*p).1 != c) {
            return Err(dim_err("concat_rows", "column counts differ"));
        }
        let r: usize = parts.iter().map(|p| self.rc(*p).0).sum();
        let mut out = Vec::with_capacity(r * c);
        for p in parts {
            out.extend_from_slice(self.data(*p));
        }
        Ok(self.push2(r, c, out, parts, Op::ConcatRows(parts.to_vec())))
    }

    pub fn select_rows(&mut self, x: Var, idx: &[usize]) -> Result<Var> {
        let (r, c) = self.rc(x);
        if idx.iter().any(|&i| i >= r) {
            return Err(dim_err("select_rows", "row index out of range"));
        }
        let d = self.data(x);
        let mut out = Vec::with_capacity(idx.len() * c);
        for &i in idx {
            out.extend_from_slice(&d[i * c..(i + 1) * c]);
        }
        Ok(self.push2(idx.len(), c, out, &[x], Op::SelectRows { x, idx: idx.to_vec() }))
    }

    /// `base` with the rows in `idx` taken from `src` (same shape).
    pub fn scatter_rows(&mut self, base: Var, src: Var, idx: &[usize]) -> Result<Var> {
        let (r, c) = self.same_shape("scatter_rows", base, src)?;
        if idx.iter().any(|&i| i >= r) {
            return Err(dim_err("scatter_rows", "row index out of range"));
        }
        let mut out = self.data(base).to_vec();
        let s = self.data(src);
        for &i in idx {
            out[i * c..(i + 1) * c].copy_from_slice(&s[i * c..(i + 1) * c]);
        }
        Ok(self.push2(
            r,
            c,
            out,
            &[base, src],
            Op::ScatterRows {
                base,
                src,
                idx: idx.to_vec(),
            },
        ))
    }

    /// `base` with the rows in `idx` overwritten by the single row `row`.
    pub fn fill_rows(&mut self, base: Var, row: Var, idx: &[usize]) -> Result<Var> {
        let (r, c) = self.rc(base);
        if self.nodes[row.0].value.len() != c {
            return Err(dim_err("fill_rows", "row width mismatch"));
        }
        if idx.iter().any(|&i| i >= r) {
            return Err(dim_err("fill_rows", "row index out of range"));
        }
        let mut out = self.data(base).to_vec();
        let rv = self.data(row).to_vec();
        for &i in idx {
            out[i * c..(i + 1) * c].copy_from_slice(&rv);
        }
        Ok(self.push2(
            r,
            c,
            out,
            &[base, row],
            Op::FillRows {
                base,
                row,
                idx: idx.to_vec(),
            },
        ))
    }

    /// All pairwise row distances: `(m x d, k x d) -> m x k`.
    pub fn pairwise(&mut self, a: Var, b: Var, kind: PairDistance) -> Result<Var> {
        let (m, d) = self.rc(a);
        let (k, d2) = self.rc(b);
        if d != d2 {
            return Err(dim_err("pairwise", format!("width {d} vs {d2}")));
        }
        let (ad, bd) = (self.data(a), self.data(b));
        let mut out = vec![0.0; m * k];
        for i in 0..m {
            for j in 0..k {
                out[i * k + j] = row_dist(&ad[i * d..(i + 1) * d], &bd[j * d..(j + 1) * d], kind);
            }
        }
        Ok(self.push2(m, k, out, &[a, b], Op::Pairwise { a, b, kind }))
    }

    /// Distances between matching rows: `(m x d, m x d) -> m x 1`.
    pub fn row_distance(&mut self, a: Var, b: Var, kind: PairDistance) -> Result<Var> {
        let (m, d) = self.same_shape("row_distance", a, b)?;
        let (ad, bd) = (self.data(a), self.data(b));
        let out = (0..m)
            .map(|i| row_dist(&ad[i * d..(i + 1) * d], &bd[i * d..(i + 1) * d], kind))
            .collect();
        Ok(self.push2(m, 1, out, &[a, b], Op::RowDistance { a, b, kind }))
    }

    /// Minimum of each row (`m x k -> m x 1`); ties go to the first minimizer.
    pub fn row_min(&mut self, x: Var) -> Var {
        let (r, c) = self.rc(x);
        let d = self.data(x);
        let mut out = Vec::with_capacity(r);
        let mut arg = Vec::with_capacity(r);
        for i in 0..r {
            let (j, v) = argmin(&d[i * c..(i + 1) * c]);
            out.push(v);
            arg.push(j);
        }
        self.push2(r, 1, out, &[x], Op::RowMin { x, arg })
    }

    /// Minimum of each column (`m x k -> k x 1`); ties go to the first minimizer.
    pub fn col_min(&mut self, x: Var) -> Var {
        let (r, c) = self.rc(x);
        let d = self.data(x);
        let mut out = Vec::with_capacity(c);
        let mut arg = Vec::with_capacity(c);
        for j in 0..c {
            let mut best = (0, d[j]);
            for i in 1..r {
                if d[i * c + j] < best.1 {
                    best = (i, d[i * c + j]);
                }
            }
            out.push(best.1);
            arg.push(best.0);
        }
        self.push2(c, 1, out, &[x], Op::ColMin { x, arg })
    }

    /// Reverse sweep from a scalar `loss`; clears the tape.
    pub fn backward(&mut self, loss: Var) -> Result<Gradients> {
        if self.nodes.is_empty() {
            return Err(contract("backward on an empty tape"));
        }
        if self.nodes[loss.0].value.len() != 1 {
            return Err(contract(format!(
                "backward needs a scalar loss, got shape {:?}",
                self.nodes[loss.0].value.shape()
            )));
        }
        self.check_finite()?;
        let n = self.nodes.len();
        let mut grads: Vec<Option<Vec<f64>>> = (0..n).map(|_| None).collect();
        let mut leaf_grads: Vec<Option<Tensor>> = (0..n).map(|_| None).collect();
        grads[loss.0] = Some(vec![1.0]);
        for i in (0..=loss.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            let node = &self.nodes[i];
            if !node.requires_grad {
                continue;
            }
            self.backprop_node(i, &g, &mut grads);
            if let Op::Leaf = self.nodes[i].op {
                leaf_grads[i] = Some(Tensor::new(self.nodes[i].value.shape().to_vec(), g).expect("shape"));
            }
        }
        self.nodes.clear();
        self.non_finite = None;
        if leaf_grads.iter().flatten().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite("backward".into()));
        }
        Ok(Gradients { grads: leaf_grads })
    }

    fn backprop_node(&self, i: usize, g: &[f64], grads: &mut [Option<Vec<f64>>]) {
        let node = &self.nodes[i];
        let out = node.value.data();
        let (or, oc) = (node.value.rows(), node.value.cols());
        let nodes = &self.nodes;
        let wants = |v: Var| nodes[v.0].requires_grad;
        let mut acc = |v: Var, f: &mut dyn FnMut(&mut [f64])| {
            if !nodes[v.0].requires_grad {
                return;
            }
            let slot = grads[v.0].get_or_insert_with(|| vec![0.0; nodes[v.0].value.len()]);
            f(slot);
        };
        match &node.op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                let (m, k) = self.rc(*a);
                let n = oc;
                if wants(*a) {
                    // dA = G B^T
                    let bd = self.data(*b);
                    acc(*a, &mut |s| {
                        for r in 0..m {
                            for p in 0..k {
                                let mut t = 0.0;
                                for j in 0..n {
                                    t += g[r * n + j] * bd[p * n + j];
                                }
                                s[r * k + p] += t;
                            }
                        }
                    });
                }
                if wants(*b) {
                    // dB = A^T G
                    let ad = self.data(*a);
                    acc(*b, &mut |s| {
                        for r in 0..m {
                            for p in 0..k {
                                let av = ad[r * k + p];
                                if av == 0.0 {
                                    continue;
                                }
                                for j in 0..n {
                                    s[p * n + j] += av * g[r * n + j];
                                }
                            }
                        }
                    });
                }
            }
            Op::Transpose(a) => {
                let gt = transpose_kernel(g, or, oc);
                acc(*a, &mut |s| add_into(s, &gt));
            }
            Op::Add(a, b) => {
                acc(*a, &mut |s| add_into(s, g));
                acc(*b, &mut |s| add_into(s, g));
            }
            Op::Sub(a, b) => {
                acc(*a, &mut |s| add_into(s, g));
                acc(*b, &mut |s| s.iter_mut().zip(g).for_each(|(x, y)| *x -= y));
            }
            Op::Mul(a, b) => {
                let (ad, bd) = (self.data(*a), self.data(*b));
                acc(*a, &mut |s| {
                    for k in 0..s.len() {
                        s[k] += g[k] * bd[k];
                    }
                });
                acc(*b, &mut |s| {
                    for k in 0..s.len() {
                        s[k] += g[k] * ad[k];
                    }
                });
            }
            Op::AddRow(x, b) => {
                acc(*x, &mut |s| add_into(s, g));
                acc(*b, &mut |s| {
                    for (k, gv) in g.iter().enumerate() {
                        s[k % oc] += gv;
                    }
                });
            }
            Op::Scale(a, f) => acc(*a, &mut |s| s.iter_mut().zip(g).for_each(|(x, y)| *x += f * y)),
            Op::AddScalar(a) => acc(*a, &mut |s| add_into(s, g)),
            Op::MulConst(a, k) => acc(*a, &mut |s| {
                for j in 0..s.len() {
                    s[j] += g[j] * k[j];
                }
            }),
            Op::Sum(a) => acc(*a, &mut |s| s.iter_mut().for_each(|x| *x += g[0])),
            Op::Mean(a) => {
                let n = nodes[a.0].value.len() as f64;
                acc(*a, &mut |s| s.iter_mut().for_each(|x| *x += g[0] / n))
            }
            Op::MeanRows(a) => {
                let (r, c) = self.rc(*a);
                acc(*a, &mut |s| {
                    for i in 0..r {
                        for j in 0..c {
                            s[i * c + j] += g[j] / r as f64;
                        }
                    }
                })
            }
            Op::SoftmaxRows(a) => acc(*a, &mut |s| {
                for i in 0..or {
                    let y = &out[i * oc..(i + 1) * oc];
                    let gy = &g[i * oc..(i + 1) * oc];
                    let dotp: f64 = y.iter().zip(gy).map(|(p, q)| p * q).sum();
                    for j in 0..oc {
                        s[i * oc + j] += y[j] * (gy[j] - dotp);
                    }
                }
            }),
            Op::LayerNorm {
                x,
                gain,
                bias,
                xhat,
                inv_std,
            } => {
                let gd = self.data(*gain);
                acc(*gain, &mut |s| {
                    for (k, gv) in g.iter().enumerate() {
                        s[k % oc] += gv * xhat[k];
                    }
                });
                acc(*bias, &mut |s| {
                    for (k, gv) in g.iter().enumerate() {
                        s[k % oc] += gv;
                    }
                });
                acc(*x, &mut |s| {
                    let c = oc as f64;
                    for i in 0..or {
                        let row = i * oc..(i + 1) * oc;
                        let dxhat: Vec<f64> = g[row.clone()].iter().zip(gd).map(|(a, b)| a * b).collect();
                        let m1 = dxhat.iter().sum::<f64>() / c;
                        let m2 = dxhat.iter().zip(&xhat[row.clone()]).map(|(a, b)| a * b).sum::<f64>() / c;
                        for j in 0..oc {
                            s[i * oc + j] += inv_std[i] * (dxhat[j] - m1 - xhat[i * oc + j] * m2);
                        }
                    }
                });
            }
            Op::Relu(a) => {
                let ad = self.data(*a);
                acc(*a, &mut |s| {
                    for k in 0..s.len() {
                        if ad[k] > 0.0 {
                            s[k] += g[k];
                        }
                    }
                })
            }
            Op::LeakyRelu(a, slope) => {
                let ad = self.data(*a);
                acc(*a, &mut |s| {
                    for k in 0..s.len() {
                        s[k] += if ad[k] > 0.0 { g[k] } else { slope * g[k] };
                    }
                })
            }
            Op::Sigmoid(a) => acc(*a, &mut |s| {
                for k in 0..s.len() {
                    s[k] += g[k] * out[k] * (1.0 - out[k]);
                }
            }),
            Op::Tanh(a) => acc(*a, &mut |s| {
                for k in 0..s.len() {
                    s[k] += g[k] * (1.0 - out[k] * out[k]);
                }
            }),
            Op::LogSigmoid(a) => {
                let ad = self.data(*a);
                acc(*a, &mut |s| {
                    for k in 0..s.len() {
                        s[k] += g[k] * sigmoid(-ad[k]);
                    }
                })
            }
            Op::SliceCols { x, start } => {
                let c = self.rc(*x).1;
                acc(*x, &mut |s| {
                    for i in 0..or {
                        for j in 0..oc {
                            s[i * c + start + j] += g[i * oc + j];
                        }
                    }
                })
            }
            Op::ConcatCols(parts) => {
                let mut off = 0;
                for p in parts {
                    let pc = self.rc(*p).1;
                    acc(*p, &mut |s| {
                        for i in 0..or {
                            for j in 0..pc {
                                s[i * pc + j] += g[i * oc + off + j];
                            }
                        }
                    });
                    off += pc;
                }
            }
            Op::ConcatRows(parts) => {
                let mut off = 0;
                for p in parts {
                    let len = nodes[p.0].value.len();
                    acc(*p, &mut |s| add_into(s, &g[off..off + len]));
                    off += len;
                }
            }
            Op::SelectRows { x, idx } => acc(*x, &mut |s| {
                for (k, &r) in idx.iter().enumerate() {
                    for j in 0..oc {
                        s[r * oc + j] += g[k * oc + j];
                    }
                }
            }),
            Op::ScatterRows { base, src, idx } => {
                let mut from_src = vec![false; or];
                idx.iter().for_each(|&r| from_src[r] = true);
                acc(*base, &mut |s| {
                    for r in 0..or {
                        if !from_src[r] {
                            add_into(&mut s[r * oc..(r + 1) * oc], &g[r * oc..(r + 1) * oc]);
                        }
                    }
                });
                acc(*src, &mut |s| {
                    for r in 0..or {
                        if from_src[r] {
                            add_into(&mut s[r * oc..(r + 1) * oc], &g[r * oc..(r + 1) * oc]);
                        }
                    }
                });
            }
            Op::FillRows { base, row, idx } => {
                let mut filled = vec![false; or];
                idx.iter().for_each(|&r| filled[r] = true);
                acc(*base, &mut |s| {
                    for r in 0..or {
                        if !filled[r] {
                            add_into(&mut s[r * oc..(r + 1) * oc], &g[r * oc..(r + 1) * oc]);
                        }
                    }
                });
                acc(*row, &mut |s| {
                    for r in 0..or {
                        if filled[r] {
                            add_into(s, &g[r * oc..(r + 1) * oc]);
                        }
                    }
                });
            }
            Op::Pairwise { a, b, kind } => {
                let d = self.rc(*a).1;
                let (ad, bd) = (self.data(*a), self.data(*b));
                let mut ga = vec![0.0; ad.len()];
                let mut gb = vec![0.0; bd.len()];
                for i in 0..or {
                    for j in 0..oc {
                        let gv = g[i * oc + j];
                        if gv == 0.0 {
                            continue;
                        }
                        row_dist_grad(
                            &ad[i * d..(i + 1) * d],
                            &bd[j * d..(j + 1) * d],
                            *kind,
                            gv,
                            &mut ga[i * d..(i + 1) * d],
                            &mut gb[j * d..(j + 1) * d],
                        );
                    }
                }
                acc(*a, &mut |s| add_into(s, &ga));
                acc(*b, &mut |s| add_into(s, &gb));
            }
            Op::RowDistance { a, b, kind } => {
                let d = self.rc(*a).1;
                let (ad, bd) = (self.data(*a), self.data(*b));
                let mut ga = vec![0.0; ad.len()];
                let mut gb = vec![0.0; bd.len()];
                for (i, &gi) in g.iter().enumerate().take(or) {
                    let r = i * d..(i + 1) * d;
                    let (ga_r, gb_r) = (&mut ga[r.clone()], &mut gb[r.clone()]);
                    row_dist_grad(&ad[r.clone()], &bd[r], *kind, gi, ga_r, gb_r);
                }
                acc(*a, &mut |s| add_into(s, &ga));
                acc(*b, &mut |s| add_into(s, &gb));
            }
            Op::RowMin { x, arg } => {
                let c = self.rc(*x).1;
                acc(*x, &mut |s| {
                    for (i, &j) in arg.iter().enumerate() {
                        s[i * c + j] += g[i];
                    }
                })
            }
            Op::ColMin { x, arg } => {
                let c = self.rc(*x).1;
                acc(*x, &mut |s| {
                    for (j, &i) in arg.iter().enumerate() {
                        s[i * c + j] += g[j];
                    }
                })
            }
        }
    }
}

fn add_into(s: &mut [f64], g: &[f64]) {
    s.iter_mut().zip(g).for_each(|(x, y)| *x += y);
}

fn argmin(row: &[f64]) -> (usize, f64) {
    let mut best = (0, row[0]);
    for (j, &v) in row.iter().enumerate().skip(1) {
        if v < best.1 {
            best = (j, v);
        }
    }
    best
}

pub(crate) fn row_dist(x: &[f64], y: &[f64], kind: PairDistance) -> f64 {
    match kind {
        PairDistance::Cosine => 1.0 - super::tensor::cosine(x, y),
        PairDistance::L1 => x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum(),
        PairDistance::SquaredL2 => x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum(),
    }
}

fn row_dist_grad(x: &[f64], y: &[f64], kind: PairDistance, g: f64, gx: &mut [f64], gy: &mut [f64]) {
    match kind {
        PairDistance::Cosine => {
            let nx = super::tensor::norm(x);
            let ny = super::tensor::norm(y);
            let dp = super::tensor::dot(x, y);
            let prod = nx * ny;
            let den = prod.max(COS_EPS);
            let c = dp / den;
            if !(-1.0..=1.0).contains(&c) {
                // clamped: flat
                return;
            }
            // d(1 - c) = -dc; below the guard the denominator is constant.
            let norm_term = prod >= COS_EPS;
            for k in 0..x.len() {
                let mut dcx = y[k] / den;
                let mut dcy = x[k] / den;
                if norm_term {
                    dcx -= c * x[k] / (nx * nx);
                    dcy -= c * y[k] / (ny * ny);
                }
                gx[k] -= g * dcx;
                gy[k] -= g * dcy;
            }
        }
        PairDistance::L1 => {
            for k in 0..x.len() {
                let s = (x[k] - y[k]).signum() * if x[k] == y[k] { 0.0 } else { 1.0 };
                gx[k] += g * s;
                gy[k] -= g * s;
            }
        }
        PairDistance::SquaredL2 => {
            for k in 0..x.len() {
                let t = 2.0 * (x[k] - y[k]) * g;
                gx[k] += t;
                gy[k] -= t;
            }
        }
    }
}
