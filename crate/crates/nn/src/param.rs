use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::scalar::Scalar;
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    /// Updated by the optimizer.
    Trainable,
    /// Running statistics; serialized but never optimized.
    Buffer,
}

/// A named parameter vector and its accumulated gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Param<T> {
    pub name: &'static str,
    pub kind: ParamKind,
    pub value: Vec<T>,
    pub grad: Vec<T>,
}

impl<T: Scalar> Param<T> {
    pub fn trainable(name: &'static str, value: Vec<T>) -> Self {
        let grad = vec![T::zero(); value.len()];
        Self { name, kind: ParamKind::Trainable, value, grad }
    }

    pub fn buffer(name: &'static str, value: Vec<T>) -> Self {
        Self { name, kind: ParamKind::Buffer, value, grad: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.value.len()
    }

    pub fn is_empty(&self) -> bool {
        self.value.is_empty()
    }

    pub fn is_trainable(&self) -> bool {
        self.kind == ParamKind::Trainable
    }

    pub fn zero_grad(&mut self) {
        self.grad.iter_mut().for_each(|g| *g = T::zero());
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Batch statistics, dropout active, running statistics updated.
    Train,
    /// Running statistics, dropout off. Deterministic.
    Eval,
}

/// Per-call state threaded through forward passes.
pub struct Ctx {
    pub mode: Mode,
    pub rng: ChaCha8Rng,
}

impl Ctx {
    pub fn train(seed: u64) -> Self {
        Self { mode: Mode::Train, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn eval() -> Self {
        Self { mode: Mode::Eval, rng: ChaCha8Rng::seed_from_u64(0) }
    }

    pub fn is_train(&self) -> bool {
        self.mode == Mode::Train
    }
}

/// A differentiable block with cached forward state.
///
/// `backward` consumes the cache of the most recent `forward`, accumulates
/// parameter gradients and returns the gradient with respect to the input.
pub trait Layer<T: Scalar> {
    fn forward(&mut self, x: &Tensor<T>, ctx: &mut Ctx) -> Tensor<T>;
    fn backward(&mut self, grad_out: &Tensor<T>) -> Tensor<T>;
    fn params(&self) -> Vec<&Param<T>>;
    fn params_mut(&mut self) -> Vec<&mut Param<T>>;
}

/// Exact number of trainable scalars.
pub fn count_trainable<T: Scalar>(params: &[&Param<T>]) -> usize {
    params.iter().filter(|p| p.is_trainable()).map(|p| p.len()).sum()
}

pub fn zero_grads<T: Scalar>(params: Vec<&mut Param<T>>) {
    for p in params {
        p.zero_grad();
    }
}

/// All parameter values, trainable and buffer, flattened in order.
pub fn export_state<T: Scalar>(params: &[&Param<T>]) -> Vec<f64> {
    params.iter().flat_map(|p| p.value.iter().map(|v| v.as_f64())).collect()
}

/// Inverse of [`export_state`] for a network with the same parameter layout.
pub fn import_state<T: Scalar>(params: Vec<&mut Param<T>>, state: &[f64]) -> crate::error::Result<()> {
    let expected: usize = params.iter().map(|p| p.len()).sum();
    if expected != state.len() {
        return Err(crate::error::Error::Validation(format!(
            "state holds {} values, network expects {expected}",
            state.len()
        )));
    }
    let mut values = state.iter();
    for p in params {
        for (v, s) in p.value.iter_mut().zip(values.by_ref()) {
            *v = T::lit(*s);
        }
    }
    Ok(())
}
