//! Adam optimizer with bias correction.

use crate::error::{Error, Result};

use super::Tensor;

/// Per-parameter first/second moment estimates plus the step counter and
/// learning-rate schedule state.
pub struct AdamState {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    shapes: Vec<(usize, usize)>,
    step: u64,
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
}

impl AdamState {
    /// Moments start at zero; beta1 = 0.9, beta2 = 0.999, eps = 1e-8.
    pub fn new(params: &[&Tensor], lr: f64) -> Self {
        AdamState {
            m: params.iter().map(|p| vec![0.0; p.len()]).collect(),
            v: params.iter().map(|p| vec![0.0; p.len()]).collect(),
            shapes: params.iter().map(|p| p.shape()).collect(),
            step: 0,
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn lr(&self) -> f64 {
        self.lr
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// Multiplies the learning rate by `factor` (applied once per epoch).
    pub fn decay_lr(&mut self, factor: f64) {
        self.lr *= factor;
    }

    /// One Adam update. `grads` must align with the parameter list the state
    /// was built from; a zero gradient leaves its parameter unchanged.
    pub fn step(&mut self, params: &mut [&mut Tensor], grads: &[Tensor]) -> Result<()> {
        if params.len() != self.shapes.len() || grads.len() != self.shapes.len() {
            return Err(Error::shape(
                "adam_step",
                format!(
                    "{} params / {} grads vs {} slots",
                    params.len(),
                    grads.len(),
                    self.shapes.len()
                ),
            ));
        }
        for ((p, g), expect) in params.iter().zip(grads).zip(&self.shapes) {
            if p.shape() != *expect || g.shape() != *expect {
                return Err(Error::shape(
                    "adam_step",
                    format!(
                        "parameter {:?} / gradient {:?} vs slot {:?}",
                        p.shape(),
                        g.shape(),
                        expect
                    ),
                ));
            }
        }

        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        for ((param, grad), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            for k in 0..grad.len() {
                let g = grad.data[k];
                m[k] = self.beta1 * m[k] + (1.0 - self.beta1) * g;
                v[k] = self.beta2 * v[k] + (1.0 - self.beta2) * g * g;
                let m_hat = m[k] / bc1;
                let v_hat = v[k] / bc2;
                param.data[k] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
            }
        }
        Ok(())
    }
}
