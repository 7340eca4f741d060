use rand_chacha::ChaCha8Rng;

use crate::init::normal_vec;
use crate::param::{Ctx, Layer, Param};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

const EPS: f64 = 1e-5;
const MOMENTUM: f64 = 0.1;

/// Per-channel batch normalization with running statistics.
pub struct BatchNorm2d<T> {
    pub channels: usize,
    pub gamma: Param<T>,
    pub beta: Param<T>,
    pub running_mean: Param<T>,
    pub running_var: Param<T>,
    cache: Option<BnCache<T>>,
}

struct BnCache<T> {
    xhat: Tensor<T>,
    inv_std: Vec<T>,
    train: bool,
}

impl<T: Scalar> BatchNorm2d<T> {
    pub fn new(channels: usize, rng: &mut ChaCha8Rng) -> Self {
        Self {
            channels,
            gamma: Param::trainable("gamma", normal_vec(rng, channels, 1.0, 0.02)),
            beta: Param::trainable("beta", vec![T::zero(); channels]),
            running_mean: Param::buffer("running_mean", vec![T::zero(); channels]),
            running_var: Param::buffer("running_var", vec![T::one(); channels]),
            cache: None,
        }
    }

    /// Identity affine transform with identity running statistics.
    pub fn identity(channels: usize) -> Self {
        Self {
            channels,
            gamma: Param::trainable("gamma", vec![T::one(); channels]),
            beta: Param::trainable("beta", vec![T::zero(); channels]),
            running_mean: Param::buffer("running_mean", vec![T::zero(); channels]),
            running_var: Param::buffer("running_var", vec![T::one(); channels]),
            cache: None,
        }
    }
}

impl<T: Scalar> Layer<T> for BatchNorm2d<T> {
    fn forward(&mut self, x: &Tensor<T>, ctx: &mut Ctx) -> Tensor<T> {
        let [n, c, _, _] = x.shape();
        assert_eq!(c, self.channels, "batch norm channels");
        let plane = x.plane_len();
        let m = n * plane;
        let eps = T::lit(EPS);
        let train = ctx.is_train();
        let mut mean = vec![T::zero(); c];
        let mut var = vec![T::zero(); c];
        if train {
            let inv_m = T::one() / T::from_usize_lossy(m);
            for i in 0..n {
                let s = x.sample(i);
                for ch in 0..c {
                    mean[ch] = mean[ch] + s[ch * plane..(ch + 1) * plane].iter().copied().sum::<T>();
                }
            }
            mean.iter_mut().for_each(|v| *v = *v * inv_m);
            for i in 0..n {
                let s = x.sample(i);
                for ch in 0..c {
                    let mu = mean[ch];
                    var[ch] =
                        var[ch] + s[ch * plane..(ch + 1) * plane].iter().map(|v| (*v - mu) * (*v - mu)).sum::<T>();
                }
            }
            var.iter_mut().for_each(|v| *v = *v * inv_m);
            let mom = T::lit(MOMENTUM);
            let unbias = if m > 1 { T::from_usize_lossy(m) / T::from_usize_lossy(m - 1) } else { T::one() };
            for ch in 0..c {
                self.running_mean.value[ch] = (T::one() - mom) * self.running_mean.value[ch] + mom * mean[ch];
                self.running_var.value[ch] = (T::one() - mom) * self.running_var.value[ch] + mom * var[ch] * unbias;
            }
        } else {
            mean.copy_from_slice(&self.running_mean.value);
            var.copy_from_slice(&self.running_var.value);
        }
        let inv_std: Vec<T> = var.iter().map(|v| T::one() / (*v + eps).sqrt()).collect();
        let mut xhat = Tensor::zeros(x.shape());
        let mut out = Tensor::zeros(x.shape());
        for i in 0..n {
            let (s, xh) = (x.sample(i), xhat.sample_mut(i));
            for ch in 0..c {
                for j in ch * plane..(ch + 1) * plane {
                    xh[j] = (s[j] - mean[ch]) * inv_std[ch];
                }
            }
            let (xh, o) = (xhat.sample(i), out.sample_mut(i));
            for ch in 0..c {
                let (g, b) = (self.gamma.value[ch], self.beta.value[ch]);
                for j in ch * plane..(ch + 1) * plane {
                    o[j] = g * xh[j] + b;
                }
            }
        }
        self.cache = Some(BnCache { xhat, inv_std, train });
        out
    }

    fn backward(&mut self, grad_out: &Tensor<T>) -> Tensor<T> {
        let BnCache { xhat, inv_std, train } = self.cache.take().expect("forward before backward");
        let [n, c, _, _] = grad_out.shape();
        let plane = grad_out.plane_len();
        let m = T::from_usize_lossy(n * plane);
        let mut sum_dy = vec![T::zero(); c];
        let mut sum_dy_xhat = vec![T::zero(); c];
        for i in 0..n {
            let (g, xh) = (grad_out.sample(i), xhat.sample(i));
            for ch in 0..c {
                for j in ch * plane..(ch + 1) * plane {
                    sum_dy[ch] = sum_dy[ch] + g[j];
                    sum_dy_xhat[ch] = sum_dy_xhat[ch] + g[j] * xh[j];
                }
            }
        }
        for ch in 0..c {
            self.gamma.grad[ch] = self.gamma.grad[ch] + sum_dy_xhat[ch];
            self.beta.grad[ch] = self.beta.grad[ch] + sum_dy[ch];
        }
        let mut dx = Tensor::zeros(grad_out.shape());
        for i in 0..n {
            let (g, xh) = (grad_out.sample(i), xhat.sample(i));
            let d = dx.sample_mut(i);
            for ch in 0..c {
                let scale = self.gamma.value[ch] * inv_std[ch];
                if train {
                    let (mean_dy, mean_dy_xhat) = (sum_dy[ch] / m, sum_dy_xhat[ch] / m);
                    for j in ch * plane..(ch + 1) * plane {
                        d[j] = scale * (g[j] - mean_dy - xh[j] * mean_dy_xhat);
                    }
                } else {
                    for j in ch * plane..(ch + 1) * plane {
                        d[j] = scale * g[j];
                    }
                }
            }
        }
        dx
    }

    fn params(&self) -> Vec<&Param<T>> {
        vec![&self.gamma, &self.beta, &self.running_mean, &self.running_var]
    }

    fn params_mut(&mut self) -> Vec<&mut Param<T>> {
        vec![&mut self.gamma, &mut self.beta, &mut self.running_mean, &mut self.running_var]
    }
}
