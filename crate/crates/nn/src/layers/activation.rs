use rand::Rng;

use crate::param::{Ctx, Layer, Param};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

pub struct LeakyRelu<T> {
    pub slope: T,
    input: Option<Tensor<T>>,
}

impl<T: Scalar> LeakyRelu<T> {
    pub fn new(slope: T) -> Self {
        Self { slope, input: None }
    }
}

impl<T: Scalar> Layer<T> for LeakyRelu<T> {
    fn forward(&mut self, x: &Tensor<T>, _ctx: &mut Ctx) -> Tensor<T> {
        self.input = Some(x.clone());
        let s = self.slope;
        x.map(|v| if v > T::zero() { v } else { v * s })
    }

    fn backward(&mut self, grad_out: &Tensor<T>) -> Tensor<T> {
        let x = self.input.take().expect("forward before backward");
        let s = self.slope;
        grad_out.zip_map(&x, |g, v| if v > T::zero() { g } else { g * s })
    }

    fn params(&self) -> Vec<&Param<T>> {
        Vec::new()
    }

    fn params_mut(&mut self) -> Vec<&mut Param<T>> {
        Vec::new()
    }
}

#[derive(Default)]
pub struct Relu<T> {
    output: Option<Tensor<T>>,
}

impl<T: Scalar> Relu<T> {
    pub fn new() -> Self {
        Self { output: None }
    }
}

pub(crate) fn relu<T: Scalar>(x: &Tensor<T>) -> Tensor<T> {
    x.map(|v| v.max(T::zero()))
}

/// Gradient of ReLU given its output.
pub(crate) fn relu_backward<T: Scalar>(grad_out: &Tensor<T>, output: &Tensor<T>) -> Tensor<T> {
    grad_out.zip_map(output, |g, y| if y > T::zero() { g } else { T::zero() })
}

impl<T: Scalar> Layer<T> for Relu<T> {
    fn forward(&mut self, x: &Tensor<T>, _ctx: &mut Ctx) -> Tensor<T> {
        let y = relu(x);
        self.output = Some(y.clone());
        y
    }

    fn backward(&mut self, grad_out: &Tensor<T>) -> Tensor<T> {
        relu_backward(grad_out, &self.output.take().expect("forward before backward"))
    }

    fn params(&self) -> Vec<&Param<T>> {
        Vec::new()
    }

    fn params_mut(&mut self) -> Vec<&mut Param<T>> {
        Vec::new()
    }
}

#[inline]
pub fn sigmoid<T: Scalar>(v: T) -> T {
    if v >= T::zero() {
        T::one() / (T::one() + (-v).exp())
    } else {
        let e = v.exp();
        e / (T::one() + e)
    }
}

#[derive(Default)]
pub struct Sigmoid<T> {
    output: Option<Tensor<T>>,
}

impl<T: Scalar> Sigmoid<T> {
    pub fn new() -> Self {
        Self { output: None }
    }
}

impl<T: Scalar> Layer<T> for Sigmoid<T> {
    fn forward(&mut self, x: &Tensor<T>, _ctx: &mut Ctx) -> Tensor<T> {
        let y = x.map(sigmoid);
        self.output = Some(y.clone());
        y
    }

    fn backward(&mut self, grad_out: &Tensor<T>) -> Tensor<T> {
        let y = self.output.take().expect("forward before backward");
        grad_out.zip_map(&y, |g, s| g * s * (T::one() - s))
    }

    fn params(&self) -> Vec<&Param<T>> {
        Vec::new()
    }

    fn params_mut(&mut self) -> Vec<&mut Param<T>> {
        Vec::new()
    }
}

/// Inverted dropout; identity in eval mode.
pub struct Dropout<T> {
    pub rate: T,
    mask: Option<Vec<T>>,
}

impl<T: Scalar> Dropout<T> {
    pub fn new(rate: T) -> Self {
        Self { rate, mask: None }
    }
}

impl<T: Scalar> Layer<T> for Dropout<T> {
    fn forward(&mut self, x: &Tensor<T>, ctx: &mut Ctx) -> Tensor<T> {
        if !ctx.is_train() || self.rate <= T::zero() {
            self.mask = None;
            return x.clone();
        }
        let keep = T::one() - self.rate;
        let scale = T::one() / keep;
        let p = keep.as_f64();
        let mask: Vec<T> = (0..x.len()).map(|_| if ctx.rng.random::<f64>() < p { scale } else { T::zero() }).collect();
        let mut y = x.clone();
        for (v, m) in y.data_mut().iter_mut().zip(&mask) {
            *v = *v * *m;
        }
        self.mask = Some(mask);
        y
    }

    fn backward(&mut self, grad_out: &Tensor<T>) -> Tensor<T> {
        match self.mask.take() {
            None => grad_out.clone(),
            Some(mask) => {
                let mut g = grad_out.clone();
                for (v, m) in g.data_mut().iter_mut().zip(&mask) {
                    *v = *v * *m;
                }
                g
            }
        }
    }

    fn params(&self) -> Vec<&Param<T>> {
        Vec::new()
    }

    fn params_mut(&mut self) -> Vec<&mut Param<T>> {
        Vec::new()
    }
}
