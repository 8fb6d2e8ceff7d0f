//! Single-layer LSTM with a linear read-out. Gate blocks are laid out as
//! `[input | forget | cell | output]` along the `4H` axis.

use crate::error::{dim_err, Result};
use crate::numerics::{dropout_mask, Bound, Graph, ParamId, ParamSet, Tensor, Var};
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct Lstm {
    pub params: ParamSet,
    input_dim: usize,
    hidden: usize,
    w_x: ParamId,
    w_h: ParamId,
    bias: ParamId,
    head_w: ParamId,
    head_b: ParamId,
}

/// Recurrent state for plain (graph-free) inference.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

fn sigmoid(x: f64) -> f64 {
    crate::numerics::tensor::sigmoid(x)
}

impl Lstm {
    pub fn new(input_dim: usize, hidden: usize, rng: &mut Rng) -> Self {
        let mut params = ParamSet::new();
        let w_x = params.add_xavier("lstm.w_x", input_dim, 4 * hidden, rng);
        let w_h = params.add_xavier("lstm.w_h", hidden, 4 * hidden, rng);
        let mut b = vec![0.0; 4 * hidden];
        b[hidden..2 * hidden].fill(1.0);
        let bias = params.add("lstm.bias", Tensor::vector(b));
        let head_w = params.add_xavier("head.w", hidden, 1, rng);
        let head_b = params.add("head.b", Tensor::vector(vec![0.0]));
        Self {
            params,
            input_dim,
            hidden,
            w_x,
            w_h,
            bias,
            head_w,
            head_b,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn zero_state(&self) -> LstmState {
        LstmState {
            h: vec![0.0; self.hidden],
            c: vec![0.0; self.hidden],
        }
    }

    /// Advances `state` by one input row and returns the read-out.
    pub fn step(&self, state: &mut LstmState, x: &[f64]) -> Result<f64> {
        if x.len() != self.input_dim {
            return Err(dim_err("lstm step", format!("input {} vs {}", x.len(), self.input_dim)));
        }
        let h4 = 4 * self.hidden;
        let wx = self.params[self.w_x].data();
        let wh = self.params[self.w_h].data();
        let mut z = self.params[self.bias].data().to_vec();
        for (i, xi) in x.iter().enumerate() {
            if *xi != 0.0 {
                for (zj, w) in z.iter_mut().zip(&wx[i * h4..(i + 1) * h4]) {
                    *zj += xi * w;
                }
            }
        }
        for (i, hi) in state.h.iter().enumerate() {
            for (zj, w) in z.iter_mut().zip(&wh[i * h4..(i + 1) * h4]) {
                *zj += hi * w;
            }
        }
        let h = self.hidden;
        let head = self.params[self.head_w].data();
        let mut y = self.params[self.head_b].data()[0];
        for j in 0..h {
            let ig = sigmoid(z[j]);
            let fg = sigmoid(z[h + j]);
            let gg = z[2 * h + j].tanh();
            let og = sigmoid(z[3 * h + j]);
            state.c[j] = fg * state.c[j] + ig * gg;
            state.h[j] = og * state.c[j].tanh();
            y += state.h[j] * head[j];
        }
        Ok(y)
    }

    /// Mean squared error over a batch of equally long sequences, built on
    /// the tape. `inputs[t]` is the `B x input_dim` row block of step `t`
    /// and `targets[t]` the matching `B` targets.
    pub fn sequence_loss(
        &self,
        g: &mut Graph,
        p: &Bound,
        inputs: &[Tensor],
        targets: &[Vec<f64>],
        dropout: f64,
        mut rng: Option<&mut Rng>,
    ) -> Result<Var> {
        let Some(first) = inputs.first() else {
            return Err(dim_err("lstm sequence", "empty sequence"));
        };
        let b = first.rows();
        let hd = self.hidden;
        let mut h = g.constant(Tensor::zeros(&[b, hd]));
        let mut c = g.constant(Tensor::zeros(&[b, hd]));
        let mut errs = Vec::with_capacity(inputs.len());
        for (x, y) in inputs.iter().zip(targets) {
            let xv = g.constant(x.clone());
            let zx = g.matmul(xv, p[self.w_x])?;
            let zh = g.matmul(h, p[self.w_h])?;
            let z = g.add(zx, zh)?;
            let z = g.add_row(z, p[self.bias])?;
            let zi = g.slice_cols(z, 0, hd)?;
            let zf = g.slice_cols(z, hd, hd)?;
            let zg = g.slice_cols(z, 2 * hd, hd)?;
            let zo = g.slice_cols(z, 3 * hd, hd)?;
            let ig = g.sigmoid(zi);
            let fg = g.sigmoid(zf);
            let gg = g.tanh(zg);
            let og = g.sigmoid(zo);
            let keep = g.mul(fg, c)?;
            let write = g.mul(ig, gg)?;
            c = g.add(keep, write)?;
            let tc = g.tanh(c);
            h = g.mul(og, tc)?;
            let out_h = match (dropout > 0.0, rng.as_deref_mut()) {
                (true, Some(r)) => g.mul_const(h, dropout_mask(b * hd, dropout, r))?,
                _ => h,
            };
            let pred = g.linear(out_h, p[self.head_w], p[self.head_b])?;
            let target = g.constant(Tensor::new(vec![b, 1], y.clone())?);
            let diff = g.sub(pred, target)?;
            errs.push(g.mul(diff, diff)?);
        }
        let all = g.concat_rows(&errs)?;
        Ok(g.mean(all))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::finite_diff_check;
    use crate::rng;

    fn seq(b: usize, steps: usize, din: usize, seed: u64) -> (Vec<Tensor>, Vec<Vec<f64>>) {
        use rand::Rng as _;
        let mut r = rng::stream(seed, "test/seq");
        let xs = (0..steps)
            .map(|_| Tensor::new(vec![b, din], (0..b * din).map(|_| r.gen_range(-1.0..1.0)).collect()).unwrap())
            .collect();
        let ys = (0..steps)
            .map(|_| (0..b).map(|_| r.gen_range(0.0..1.0)).collect())
            .collect();
        (xs, ys)
    }

    #[test]
    fn forget_bias_starts_at_one() {
        let m = Lstm::new(3, 4, &mut rng::stream(1, "t"));
        let b = m.params[m.bias].data();
        assert_eq!(&b[4..8], &[1.0; 4]);
        assert_eq!(b.iter().sum::<f64>(), 4.0);
    }

    #[test]
    fn plain_step_matches_tape() {
        let m = Lstm::new(3, 5, &mut rng::stream(2, "t"));
        let (xs, ys) = seq(1, 6, 3, 3);
        let mut g = Graph::new();
        let p = g.bind(&m.params, false);
        let loss = m.sequence_loss(&mut g, &p, &xs, &ys, 0.0, None).unwrap();
        let mut st = m.zero_state();
        let mut mse = 0.0;
        for (x, y) in xs.iter().zip(&ys) {
            let out = m.step(&mut st, x.data()).unwrap();
            mse += (out - y[0]).powi(2);
        }
        mse /= xs.len() as f64;
        assert!((g.scalar(loss) - mse).abs() < 1e-12);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let m = Lstm::new(2, 3, &mut rng::stream(4, "t"));
        assert!(m.params.num_scalars() <= 200);
        let (xs, ys) = seq(2, 4, 2, 5);
        let check = finite_diff_check(|g, p| m.sequence_loss(g, p, &xs, &ys, 0.0, None), &m.params, 1e-6).unwrap();
        assert!(check.max_rel_error < 1e-4, "{check:?}");
    }

    #[test]
    fn wrong_input_width_rejected() {
        let m = Lstm::new(3, 2, &mut rng::stream(1, "t"));
        assert!(m.step(&mut m.zero_state(), &[1.0]).is_err());
    }
}
