use serde::{Deserialize, Serialize};

use crate::param::Param;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { learning_rate: 2e-4, beta1: 0.5, beta2: 0.999, eps: 1e-8 }
    }
}

/// Adam with bias correction. State is keyed by parameter position, so the
/// same parameter list order must be passed to every `step`.
pub struct Adam<T> {
    pub config: AdamConfig,
    step: u64,
    moments: Vec<(Vec<T>, Vec<T>)>,
}

impl<T: Scalar> Adam<T> {
    pub fn new(config: AdamConfig) -> Self {
        Self { config, step: 0, moments: Vec::new() }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    /// Applies one update to every trainable parameter from its accumulated gradient.
    pub fn step(&mut self, params: Vec<&mut Param<T>>) {
        self.step += 1;
        let c = self.config;
        let t = self.step as i32;
        let bc1 = 1.0 - c.beta1.powi(t);
        let bc2 = 1.0 - c.beta2.powi(t);
        let (b1, b2) = (T::lit(c.beta1), T::lit(c.beta2));
        let step_size = T::lit(c.learning_rate * bc2.sqrt() / bc1);
        let eps = T::lit(c.eps * bc2.sqrt());
        let trainable = params.into_iter().filter(|p| p.is_trainable());
        for (k, p) in trainable.enumerate() {
            if self.moments.len() <= k {
                self.moments.push((vec![T::zero(); p.len()], vec![T::zero(); p.len()]));
            }
            let (m, v) = &mut self.moments[k];
            assert_eq!(m.len(), p.len(), "parameter order changed between Adam steps");
            for ((w, g), (mi, vi)) in p.value.iter_mut().zip(&p.grad).zip(m.iter_mut().zip(v.iter_mut())) {
                *mi = b1 * *mi + (T::one() - b1) * *g;
                *vi = b2 * *vi + (T::one() - b2) * *g * *g;
                *w = *w - step_size * *mi / (vi.sqrt() + eps);
            }
        }
    }
}
