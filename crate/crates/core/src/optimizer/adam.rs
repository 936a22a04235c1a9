use ndarray::{Array2, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::Matrix;

/// Adam hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0)
            || !(0.0..1.0).contains(&self.beta1)
            || !(0.0..1.0).contains(&self.beta2)
            || !(self.eps > 0.0)
        {
            return invalid(format!("invalid Adam configuration {self:?}"));
        }
        Ok(())
    }
}

/// First/second moment estimates for one matrix parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub first_moment: Matrix,
    pub second_moment: Matrix,
    pub steps: u64,
}

impl AdamState {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            first_moment: Array2::zeros((rows, cols)),
            second_moment: Array2::zeros((rows, cols)),
            steps: 0,
        }
    }

    /// Bias-corrected Adam update of `param` in place.
    pub fn step(&mut self, param: &mut Matrix, grad: &Matrix, cfg: &AdamConfig) -> Result<()> {
        if param.dim() != grad.dim() || param.dim() != self.first_moment.dim() {
            return invalid("Adam parameter, gradient and state shapes differ");
        }
        self.steps += 1;
        let t = self.steps as i32;
        let bc1 = 1.0 - cfg.beta1.powi(t);
        let bc2 = 1.0 - cfg.beta2.powi(t);
        Zip::from(param)
            .and(grad)
            .and(&mut self.first_moment)
            .and(&mut self.second_moment)
            .for_each(|p, &g, m, v| {
                *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
                *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
                let m_hat = *m / bc1;
                let v_hat = *v / bc2;
                *p -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
            });
        Ok(())
    }
}
