use serde::{Deserialize, Serialize};

use super::params::ParamSet;
use super::tensor::Tensor;
use crate::error::{contract, dim_err, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamWConfig {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamWConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-4,
            weight_decay: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamWConfig {
    pub fn with_lr(learning_rate: f64, weight_decay: f64) -> Self {
        Self {
            learning_rate,
            weight_decay,
            ..Self::default()
        }
    }
}

/// AdamW with decoupled weight decay: parameters shrink by
/// `1 - lr * weight_decay` before the bias-corrected Adam step.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamW {
    pub config: AdamWConfig,
    step: u64,
    first: Vec<Tensor>,
    second: Vec<Tensor>,
}

impl AdamW {
    pub fn new(config: AdamWConfig, params: &ParamSet) -> Self {
        let zeros = || params.tensors().iter().map(|t| Tensor::zeros(t.shape())).collect();
        Self {
            config,
            step: 0,
            first: zeros(),
            second: zeros(),
        }
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    pub fn step(&mut self, params: &mut ParamSet, grads: &[Tensor]) -> Result<()> {
        if grads.len() != params.len() || self.first.len() != params.len() {
            return Err(dim_err("adamw_step", "gradient count differs from parameters"));
        }
        self.step += 1;
        let AdamWConfig {
            learning_rate: lr,
            weight_decay: wd,
            beta1: b1,
            beta2: b2,
            epsilon: eps,
        } = self.config;
        let t = self.step as f64;
        let c1 = 1.0 - b1.powf(t);
        let c2 = 1.0 - b2.powf(t);
        for (k, p) in params.tensors_mut().iter_mut().enumerate() {
            let g = grads[k].data();
            if g.len() != p.len() {
                return Err(dim_err("adamw_step", "gradient shape differs from parameter"));
            }
            let m = self.first[k].data_mut();
            let v = self.second[k].data_mut();
            for (j, pv) in p.data_mut().iter_mut().enumerate() {
                *pv *= 1.0 - lr * wd;
                m[j] = b1 * m[j] + (1.0 - b1) * g[j];
                v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
                let mh = m[j] / c1;
                let vh = v[j] / c2;
                *pv -= lr * mh / (vh.sqrt() + eps);
            }
        }
        Ok(())
    }

    /// Moments and step counter as a parameter set (for checkpoints).
    pub fn export(&self, params: &ParamSet) -> ParamSet {
        let mut out = ParamSet::new();
        out.add("adamw.step", Tensor::scalar(self.step as f64));
        for (name, (m, v)) in params.names().iter().zip(self.first.iter().zip(&self.second)) {
            out.add(format!("adamw.m.{name}"), m.clone());
            out.add(format!("adamw.v.{name}"), v.clone());
        }
        out
    }

    pub fn import(config: AdamWConfig, params: &ParamSet, state: &ParamSet) -> Result<Self> {
        let step = state
            .find("adamw.step")
            .map(|id| state[id].item() as u64)
            .ok_or_else(|| contract("optimizer state lacks a step counter"))?;
        let mut me = Self::new(config, params);
        me.step = step;
        for (k, name) in params.names().iter().enumerate() {
            let m = state
                .find(&format!("adamw.m.{name}"))
                .ok_or_else(|| contract(format!("optimizer state lacks moments for {name}")))?;
            let v = state
                .find(&format!("adamw.v.{name}"))
                .ok_or_else(|| contract(format!("optimizer state lacks moments for {name}")))?;
            if state[m].shape() != params.tensors()[k].shape() {
                return Err(dim_err("AdamW::import", name.clone()));
            }
            me.first[k] = state[m].clone();
            me.second[k] = state[v].clone();
        }
        Ok(me)
    }
}
