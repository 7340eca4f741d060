use rand_chacha::ChaCha8Rng;

use crate::init::normal_vec;
use crate::param::{Ctx, Layer, Param};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Dense layer over flattened samples: `[n, in, 1, 1] -> [n, out, 1, 1]` (any input spatial shape).
pub struct Linear<T> {
    pub in_features: usize,
    pub out_features: usize,
    pub weight: Param<T>,
    pub bias: Param<T>,
    input: Option<Tensor<T>>,
}

impl<T: Scalar> Linear<T> {
    pub fn new(in_features: usize, out_features: usize, rng: &mut ChaCha8Rng) -> Self {
        Self {
            in_features,
            out_features,
            weight: Param::trainable("weight", normal_vec(rng, in_features * out_features, 0.0, 0.02)),
            bias: Param::trainable("bias", vec![T::zero(); out_features]),
            input: None,
        }
    }
}

impl<T: Scalar> Layer<T> for Linear<T> {
    fn forward(&mut self, x: &Tensor<T>, _ctx: &mut Ctx) -> Tensor<T> {
        let n = x.batch();
        assert_eq!(x.sample_len(), self.in_features, "linear input features");
        let mut out = Tensor::zeros([n, self.out_features, 1, 1]);
        for i in 0..n {
            out.sample_mut(i).copy_from_slice(&self.bias.value);
        }
        T::gemm(
            n,
            self.in_features,
            self.out_features,
            x.data(),
            false,
            &self.weight.value,
            true,
            T::one(),
            out.data_mut(),
        );
        self.input = Some(x.clone());
        out
    }

    fn backward(&mut self, grad_out: &Tensor<T>) -> Tensor<T> {
        let x = self.input.take().expect("forward before backward");
        let n = x.batch();
        for i in 0..n {
            for (b, g) in self.bias.grad.iter_mut().zip(grad_out.sample(i)) {
                *b = *b + *g;
            }
        }
        T::gemm(
            self.out_features,
            n,
            self.in_features,
            grad_out.data(),
            true,
            x.data(),
            false,
            T::one(),
            &mut self.weight.grad,
        );
        let mut dx = Tensor::zeros(x.shape());
        T::gemm(
            n,
            self.out_features,
            self.in_features,
            grad_out.data(),
            false,
            &self.weight.value,
            false,
            T::zero(),
            dx.data_mut(),
        );
        dx
    }

    fn params(&self) -> Vec<&Param<T>> {
        vec![&self.weight, &self.bias]
    }

    fn params_mut(&mut self) -> Vec<&mut Param<T>> {
        vec![&mut self.weight, &mut self.bias]
    }
}
