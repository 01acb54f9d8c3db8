//! Binary cross-entropy and AdamW with decoupled weight decay.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::Label;

pub const PROB_EPS: f64 = 1e-7;

/// `-[y ln p + (1 - y) ln(1 - p)]` with `p` clamped to `[1e-7, 1 - 1e-7]`.
pub fn bce_loss(p_vul: f64, label: Label) -> f64 {
    let p = p_vul.clamp(PROB_EPS, 1.0 - PROB_EPS);
    if label == 1 {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdamWConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub weight_decay: f64,
}

impl Default for AdamWConfig {
    fn default() -> Self {
        AdamWConfig {
            learning_rate: 1e-5,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            weight_decay: 0.01,
        }
    }
}

impl AdamWConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config("training.learning_rate", "must be > 0"));
        }
        for (name, b) in [
            ("training.beta1", self.beta1),
            ("training.beta2", self.beta2),
        ] {
            if !(b > 0.0 && b < 1.0) {
                return Err(Error::config(name, "must be in (0, 1)"));
            }
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::config("training.epsilon", "must be > 0"));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::config("training.weight_decay", "must be ≥ 0"));
        }
        Ok(())
    }
}

/// Moment estimates and step counter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    /// Number of steps taken so far; the next step uses `step_count + 1`.
    pub step_count: u64,
    pub config: AdamWConfig,
}

impl OptimizerState {
    pub fn new(num_params: usize, config: AdamWConfig) -> Self {
        OptimizerState {
            m: vec![0.0; num_params],
            v: vec![0.0; num_params],
            step_count: 0,
            config,
        }
    }

    /// One AdamW step, in place. Weight decay uses the pre-step parameters.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != grads.len() || params.len() != self.m.len() {
            return Err(Error::LengthMismatch {
                left: params.len(),
                right: grads.len(),
            });
        }
        if let Some(index) = grads.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFiniteGradient { index });
        }
        let AdamWConfig {
            learning_rate: eta,
            beta1,
            beta2,
            epsilon,
            weight_decay,
        } = self.config;
        self.step_count += 1;
        let t = self.step_count as i32;
        let bc1 = 1.0 - beta1.powi(t);
        let bc2 = 1.0 - beta2.powi(t);
        for (((theta, &g), m), v) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut())
            .zip(self.v.iter_mut())
        {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *theta -= eta * (m_hat / (v_hat.sqrt() + epsilon) + weight_decay * *theta);
        }
        Ok(())
    }
}

/// Functional form of [`OptimizerState::step`].
pub fn adamw_step(
    optimizer: &OptimizerState,
    params: &[f64],
    grads: &[f64],
) -> Result<(OptimizerState, Vec<f64>)> {
    let mut next = optimizer.clone();
    let mut theta = params.to_vec();
    next.step(&mut theta, grads)?;
    Ok((next, theta))
}
