//! Channel-preserving residual block: `out = relu(x + bn(conv(relu(bn(conv(x))))))`.

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::layers::activation::{relu, relu_backward, Relu};
use crate::layers::conv::{Conv2d, ConvGeometry};
use crate::layers::norm::BatchNorm2d;
use crate::param::{Ctx, Layer, Param};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

pub struct ResidualBlock<T> {
    pub channels: usize,
    pub conv1: Conv2d<T>,
    pub bn1: BatchNorm2d<T>,
    pub act1: Relu<T>,
    pub conv2: Conv2d<T>,
    pub bn2: BatchNorm2d<T>,
    output: Option<Tensor<T>>,
}

impl<T: Scalar> ResidualBlock<T> {
    pub fn new(channels: usize, rng: &mut ChaCha8Rng) -> Self {
        let g = ConvGeometry::new(3, 1, 1);
        Self {
            channels,
            conv1: Conv2d::new(channels, channels, g, rng),
            bn1: BatchNorm2d::new(channels, rng),
            act1: Relu::new(),
            conv2: Conv2d::new(channels, channels, g, rng),
            bn2: BatchNorm2d::new(channels, rng),
            output: None,
        }
    }

    pub fn try_forward(&mut self, x: &Tensor<T>, ctx: &mut Ctx) -> Result<Tensor<T>> {
        if x.channels() != self.channels {
            return Err(Error::Validation(format!(
                "residual block expects {} channels, got {}",
                self.channels,
                x.channels()
            )));
        }
        Ok(self.forward(x, ctx))
    }
}

impl<T: Scalar> Layer<T> for ResidualBlock<T> {
    fn forward(&mut self, x: &Tensor<T>, ctx: &mut Ctx) -> Tensor<T> {
        let h = self.conv1.forward(x, ctx);
        let h = self.bn1.forward(&h, ctx);
        let h = self.act1.forward(&h, ctx);
        let h = self.conv2.forward(&h, ctx);
        let mut mid = self.bn2.forward(&h, ctx);
        mid.add_assign(x);
        let out = relu(&mid);
        self.output = Some(out.clone());
        out
    }

    fn backward(&mut self, grad_out: &Tensor<T>) -> Tensor<T> {
        let out = self.output.take().expect("forward before backward");
        let g = relu_backward(grad_out, &out);
        let h = self.bn2.backward(&g);
        let h = self.conv2.backward(&h);
        let h = self.act1.backward(&h);
        let h = self.bn1.backward(&h);
        let mut dx = self.conv1.backward(&h);
        dx.add_assign(&g);
        dx
    }

    fn params(&self) -> Vec<&Param<T>> {
        let mut p = self.conv1.params();
        p.extend(self.bn1.params());
        p.extend(self.conv2.params());
        p.extend(self.bn2.params());
        p
    }

    fn params_mut(&mut self) -> Vec<&mut Param<T>> {
        let mut p = self.conv1.params_mut();
        p.extend(self.bn1.params_mut());
        p.extend(self.conv2.params_mut());
        p.extend(self.bn2.params_mut());
        p
    }
}
