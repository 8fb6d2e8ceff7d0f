//! Post-norm transformer encoder without positional encodings, so the
//! forward map is permutation-equivariant over rows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{dropout_mask, Bound, Graph, ParamId, ParamSet, Tensor, Var};
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EncoderConfig {
    /// Width of the token representations inside the encoder.
    pub model_dim: usize,
    pub heads: usize,
    pub ff_dim: usize,
    pub layers: usize,
    pub dropout: f64,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        Self {
            model_dim: 100,
            heads: 4,
            ff_dim: 400,
            layers: 2,
            dropout: 0.1,
        }
    }
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.model_dim == 0 || self.heads == 0 || !self.model_dim.is_multiple_of(self.heads) {
            return Err(Error::Config(format!(
                "model_dim {} must be a positive multiple of heads {}",
                self.model_dim, self.heads
            )));
        }
        if self.ff_dim == 0 || self.layers == 0 {
            return Err(Error::Config("ff_dim and layers must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config("dropout must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct LayerIds {
    wq: ParamId,
    bq: ParamId,
    // Key bias omitted: softmax is invariant to the per-row constant it adds.
    wk: ParamId,
    wv: ParamId,
    bv: ParamId,
    wo: ParamId,
    bo: ParamId,
    ln1_g: ParamId,
    ln1_b: ParamId,
    w1: ParamId,
    b1: ParamId,
    w2: ParamId,
    b2: ParamId,
    ln2_g: ParamId,
    ln2_b: ParamId,
}

#[derive(Debug, Clone)]
pub struct Encoder {
    cfg: EncoderConfig,
    layers: Vec<LayerIds>,
}

/// Dropout context threaded through training-time forwards.
pub type Dropout<'a> = Option<&'a mut Rng>;

pub(crate) fn maybe_dropout(g: &mut Graph, x: Var, p: f64, rng: &mut Dropout<'_>) -> Result<Var> {
    match rng {
        Some(r) if p > 0.0 => {
            let n = g.value(x).len();
            let mask = dropout_mask(n, p, r);
            g.mul_const(x, mask)
        }
        _ => Ok(x),
    }
}

impl Encoder {
    pub fn register(params: &mut ParamSet, prefix: &str, cfg: EncoderConfig, rng: &mut Rng) -> Result<Self> {
        cfg.validate()?;
        let h = cfg.model_dim;
        let f = cfg.ff_dim;
        let layers = (0..cfg.layers)
            .map(|l| {
                let n = |s: &str| format!("{prefix}.layer{l}.{s}");
                LayerIds {
                    wq: params.add_xavier(&n("attn.wq"), h, h, rng),
                    bq: params.add(n("attn.bq"), Tensor::zeros(&[h])),
                    wk: params.add_xavier(&n("attn.wk"), h, h, rng),
                    wv: params.add_xavier(&n("attn.wv"), h, h, rng),
                    bv: params.add(n("attn.bv"), Tensor::zeros(&[h])),
                    wo: params.add_xavier(&n("attn.wo"), h, h, rng),
                    bo: params.add(n("attn.bo"), Tensor::zeros(&[h])),
                    ln1_g: params.add(n("ln1.gain"), Tensor::full(&[h], 1.0)),
                    ln1_b: params.add(n("ln1.bias"), Tensor::zeros(&[h])),
                    w1: params.add_xavier(&n("ff.w1"), h, f, rng),
                    b1: params.add(n("ff.b1"), Tensor::zeros(&[f])),
                    w2: params.add_xavier(&n("ff.w2"), f, h, rng),
                    b2: params.add(n("ff.b2"), Tensor::zeros(&[h])),
                    ln2_g: params.add(n("ln2.gain"), Tensor::full(&[h], 1.0)),
                    ln2_b: params.add(n("ln2.bias"), Tensor::zeros(&[h])),
                }
            })
            .collect();
        Ok(Self { cfg, layers })
    }

    pub fn config(&self) -> &EncoderConfig {
        &self.cfg
    }

    /// `n x model_dim -> n x model_dim`.
    pub fn forward(&self, g: &mut Graph, p: &Bound, mut x: Var, mut drop: Dropout<'_>) -> Result<Var> {
        for l in &self.layers {
            let a = self.attention(g, p, l, x)?;
            let a = maybe_dropout(g, a, self.cfg.dropout, &mut drop)?;
            let r = g.add(x, a)?;
            let x1 = g.layer_norm(r, p[l.ln1_g], p[l.ln1_b])?;
            let hdn = g.linear(x1, p[l.w1], p[l.b1])?;
            let hdn = g.relu(hdn);
            let ff = g.linear(hdn, p[l.w2], p[l.b2])?;
            let ff = maybe_dropout(g, ff, self.cfg.dropout, &mut drop)?;
            let r = g.add(x1, ff)?;
            x = g.layer_norm(r, p[l.ln2_g], p[l.ln2_b])?;
        }
        Ok(x)
    }

    fn attention(&self, g: &mut Graph, p: &Bound, l: &LayerIds, x: Var) -> Result<Var> {
        let hd = self.cfg.model_dim / self.cfg.heads;
        let scale = 1.0 / (hd as f64).sqrt();
        let q = g.linear(x, p[l.wq], p[l.bq])?;
        let k = g.matmul(x, p[l.wk])?;
        let v = g.linear(x, p[l.wv], p[l.bv])?;
        let mut heads = Vec::with_capacity(self.cfg.heads);
        for h in 0..self.cfg.heads {
            let qh = g.slice_cols(q, h * hd, hd)?;
            let kh = g.slice_cols(k, h * hd, hd)?;
            let vh = g.slice_cols(v, h * hd, hd)?;
            let kt = g.transpose(kh);
            let s = g.matmul(qh, kt)?;
            let s = g.scale(s, scale);
            let w = g.softmax_rows(s);
            heads.push(g.matmul(w, vh)?);
        }
        let cat = if heads.len() == 1 {
            heads[0]
        } else {
            g.concat_cols(&heads)?
        };
        g.linear(cat, p[l.wo], p[l.bo])
    }
}
