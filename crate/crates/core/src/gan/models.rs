use super::config::ModelConfig;
use super::encoder::{Dropout, Encoder};
use crate::error::{dim_err, Result};
use crate::numerics::tensor::{sigmoid, LEAKY_SLOPE};
use crate::numerics::{Bound, Graph, ParamId, ParamSet, Tensor, Var};
use crate::rng::Rng;

/// Maps a day's (partially masked) event vectors `n x d` to reconstructions
/// `n x d`.
#[derive(Debug, Clone)]
pub struct Generator {
    pub params: ParamSet,
    config: ModelConfig,
    in_w: ParamId,
    in_b: ParamId,
    encoder: Encoder,
    out_w: ParamId,
    out_b: ParamId,
    mask: ParamId,
}

impl Generator {
    pub fn new(config: ModelConfig, rng: &mut Rng) -> Result<Self> {
        let (d, h) = (config.dim, config.encoder.model_dim);
        let mut params = ParamSet::new();
        let in_w = params.add_xavier("gen.in.weight", d, h, rng);
        let in_b = params.add("gen.in.bias", Tensor::zeros(&[h]));
        let encoder = Encoder::register(&mut params, "gen.encoder", config.encoder, rng)?;
        let out_w = params.add_xavier("gen.out.weight", h, d, rng);
        let out_b = params.add("gen.out.bias", Tensor::zeros(&[d]));
        let mask = params.add_normal("gen.mask_vector", &[d], 0.1, rng);
        Ok(Self {
            params,
            config,
            in_w,
            in_b,
            encoder,
            out_w,
            out_b,
            mask,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn mask_vector(&self) -> &[f64] {
        self.params[self.mask].data()
    }

    /// The learned mask vector as a graph node.
    pub fn mask_var(&self, p: &Bound) -> Var {
        p[self.mask]
    }

    /// Forward over already-masked inputs.
    pub fn forward(&self, g: &mut Graph, p: &Bound, v_mask: Var, drop: Dropout<'_>) -> Result<Var> {
        if g.value(v_mask).cols() != self.config.dim {
            return Err(dim_err("generator_forward", "event width differs from model dim"));
        }
        let x = g.linear(v_mask, p[self.in_w], p[self.in_b])?;
        let x = self.encoder.forward(g, p, x, drop)?;
        g.linear(x, p[self.out_w], p[self.out_b])
    }

    /// Replaces rows `masked` of `v` by the mask vector, then runs the forward.
    /// Returns `(v_mask, v_hat)`.
    pub fn forward_masked(
        &self,
        g: &mut Graph,
        p: &Bound,
        v: Var,
        masked: &[usize],
        drop: Dropout<'_>,
    ) -> Result<(Var, Var)> {
        let vm = g.fill_rows(v, p[self.mask], masked)?;
        let out = self.forward(g, p, vm, drop)?;
        Ok((vm, out))
    }

    /// Inference: reconstructions of `events` (`n x d`) with rows `masked`
    /// masked.
    pub fn reconstruct(&self, events: &Tensor, masked: &[usize]) -> Result<Tensor> {
        let mut g = Graph::new();
        let p = g.bind(&self.params, false);
        let v = g.constant(events.clone());
        let (_, out) = self.forward_masked(&mut g, &p, v, masked, None)?;
        g.check_finite()?;
        Ok(g.value(out).clone())
    }

    /// Inference without masking.
    pub fn apply(&self, v_mask: &Tensor) -> Result<Tensor> {
        self.reconstruct(v_mask, &[])
    }
}

/// Scores a set of event vectors: transformer encoder, mean pooling over
/// events, three fully connected layers with leaky ReLU between, sigmoid.
#[derive(Debug, Clone)]
pub struct Discriminator {
    pub params: ParamSet,
    config: ModelConfig,
    in_w: ParamId,
    in_b: ParamId,
    encoder: Encoder,
    fc: [(ParamId, ParamId); 3],
}

impl Discriminator {
    pub fn new(config: ModelConfig, rng: &mut Rng) -> Result<Self> {
        let (d, h) = (config.dim, config.encoder.model_dim);
        let mut params = ParamSet::new();
        let in_w = params.add_xavier("disc.in.weight", d, h, rng);
        let in_b = params.add("disc.in.bias", Tensor::zeros(&[h]));
        let encoder = Encoder::register(&mut params, "disc.encoder", config.encoder, rng)?;
        let mut fc_layer = |i: usize, fan_in: usize, fan_out: usize| {
            (
                params.add_xavier(&format!("disc.fc{i}.weight"), fan_in, fan_out, rng),
                params.add(format!("disc.fc{i}.bias"), Tensor::zeros(&[fan_out])),
            )
        };
        let fc = [fc_layer(0, h, h), fc_layer(1, h, h), fc_layer(2, h, 1)];
        Ok(Self {
            params,
            config,
            in_w,
            in_b,
            encoder,
            fc,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    /// Pre-sigmoid score (`1 x 1`).
    pub fn logit(&self, g: &mut Graph, p: &Bound, v: Var, drop: Dropout<'_>) -> Result<Var> {
        if g.value(v).cols() != self.config.dim {
            return Err(dim_err("discriminator_forward", "event width differs from model dim"));
        }
        let x = g.linear(v, p[self.in_w], p[self.in_b])?;
        let x = self.encoder.forward(g, p, x, drop)?;
        let mut z = g.mean_rows(x);
        for (i, (w, b)) in self.fc.iter().enumerate() {
            z = g.linear(z, p[*w], p[*b])?;
            if i + 1 < self.fc.len() {
                z = g.leaky_relu(z, LEAKY_SLOPE);
            }
        }
        Ok(z)
    }

    /// Probability that `events` (`n x d`) is a real day.
    pub fn probability(&self, events: &Tensor) -> Result<f64> {
        let mut g = Graph::new();
        let p = g.bind(&self.params, false);
        let v = g.constant(events.clone());
        let z = self.logit(&mut g, &p, v, None)?;
        g.check_finite()?;
        Ok(sigmoid(g.scalar(z)))
    }
}
