//! Feature-map self-attention with a learnable residual gate.
//!
//! For a sample with `N = H W` positions, queries and keys come from 1x1
//! convolutions to `C/8` channels and values from a 1x1 convolution to `C`
//! channels. Every position attends over all `N` positions:
//!
//! ```text
//! A   = softmax_rows(Q^T K)      (N x N)
//! out = x + gamma * (V A^T)      (C x N)
//! ```
//!
//! `gamma` starts at zero, so a fresh layer is the identity.

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::layers::conv::{Conv2d, ConvGeometry};
use crate::param::{Ctx, Layer, Param};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

pub struct SelfAttention<T> {
    pub channels: usize,
    pub query: Conv2d<T>,
    pub key: Conv2d<T>,
    pub value: Conv2d<T>,
    pub gamma: Param<T>,
    cache: Option<AttnCache<T>>,
}

struct AttnCache<T> {
    q: Tensor<T>,
    k: Tensor<T>,
    v: Tensor<T>,
    /// Row-stochastic attention matrix per sample.
    attn: Vec<Vec<T>>,
    /// `V A^T` per sample, before gating.
    attended: Tensor<T>,
}

/// Width of the query/key projection for `channels` input channels.
pub fn attention_key_width(channels: usize) -> usize {
    (channels / 8).max(1)
}

fn softmax_rows<T: Scalar>(scores: &mut [T], n: usize) {
    for row in scores.chunks_mut(n) {
        let max = row.iter().copied().fold(T::neg_infinity(), T::max);
        let mut sum = T::zero();
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum = sum + *v;
        }
        let inv = T::one() / sum;
        row.iter_mut().for_each(|v| *v = *v * inv);
    }
}

impl<T: Scalar> SelfAttention<T> {
    pub fn new(channels: usize, rng: &mut ChaCha8Rng) -> Self {
        let d = attention_key_width(channels);
        let pw = ConvGeometry::new(1, 1, 0);
        Self {
            channels,
            query: Conv2d::new(channels, d, pw, rng),
            key: Conv2d::new(channels, d, pw, rng),
            value: Conv2d::new(channels, channels, pw, rng),
            gamma: Param::trainable("gamma", vec![T::zero()]),
            cache: None,
        }
    }

    pub fn gamma(&self) -> T {
        self.gamma.value[0]
    }

    pub fn set_gamma(&mut self, g: T) {
        self.gamma.value[0] = g;
    }

    /// Attention matrices of the last forward pass, one `N x N` row-major block per sample.
    pub fn last_attention(&self) -> Option<&[Vec<T>]> {
        self.cache.as_ref().map(|c| c.attn.as_slice())
    }

    /// Shape-checked forward pass.
    pub fn try_forward(&mut self, x: &Tensor<T>, ctx: &mut Ctx) -> Result<Tensor<T>> {
        if x.channels() != self.channels {
            return Err(Error::Validation(format!(
                "self-attention expects {} channels, got {}",
                self.channels,
                x.channels()
            )));
        }
        Ok(self.forward(x, ctx))
    }
}

impl<T: Scalar> Layer<T> for SelfAttention<T> {
    fn forward(&mut self, x: &Tensor<T>, ctx: &mut Ctx) -> Tensor<T> {
        let [n, c, _, _] = x.shape();
        let positions = x.plane_len();
        let d = self.query.out_channels;
        let q = self.query.forward(x, ctx);
        let k = self.key.forward(x, ctx);
        let v = self.value.forward(x, ctx);
        let mut attended = Tensor::zeros(x.shape());
        let mut attn = Vec::with_capacity(n);
        for i in 0..n {
            let mut scores = vec![T::zero(); positions * positions];
            T::gemm(positions, d, positions, q.sample(i), true, k.sample(i), false, T::zero(), &mut scores);
            softmax_rows(&mut scores, positions);
            T::gemm(c, positions, positions, v.sample(i), false, &scores, true, T::zero(), attended.sample_mut(i));
            attn.push(scores);
        }
        let g = self.gamma();
        let out = x.zip_map(&attended, |a, b| a + g * b);
        self.cache = Some(AttnCache { q, k, v, attn, attended });
        out
    }

    fn backward(&mut self, grad_out: &Tensor<T>) -> Tensor<T> {
        let AttnCache { q, k, v, attn, attended } = self.cache.take().expect("forward before backward");
        let [n, c, _, _] = grad_out.shape();
        let positions = grad_out.plane_len();
        let d = self.query.out_channels;
        let g = self.gamma();
        self.gamma.grad[0] =
            self.gamma.grad[0] + grad_out.data().iter().zip(attended.data()).map(|(a, b)| *a * *b).sum::<T>();
        let d_att = grad_out.map(|v| v * g);
        let mut dq = Tensor::zeros(q.shape());
        let mut dk = Tensor::zeros(k.shape());
        let mut dv = Tensor::zeros(v.shape());
        let mut d_attn = vec![T::zero(); positions * positions];
        for i in 0..n {
            let a = &attn[i];
            let go = d_att.sample(i);
            // dV = dO A
            T::gemm(c, positions, positions, go, false, a, false, T::zero(), dv.sample_mut(i));
            // dA = dO^T V
            T::gemm(positions, c, positions, go, true, v.sample(i), false, T::zero(), &mut d_attn);
            // softmax backward, row by row
            for (da_row, a_row) in d_attn.chunks_mut(positions).zip(a.chunks(positions)) {
                let dot: T = da_row.iter().zip(a_row).map(|(x, y)| *x * *y).sum();
                for (da, av) in da_row.iter_mut().zip(a_row) {
                    *da = *av * (*da - dot);
                }
            }
            // S = Q^T K  =>  dQ = K dS^T, dK = Q dS
            T::gemm(d, positions, positions, k.sample(i), false, &d_attn, true, T::zero(), dq.sample_mut(i));
            T::gemm(d, positions, positions, q.sample(i), false, &d_attn, false, T::zero(), dk.sample_mut(i));
        }
        let mut dx = grad_out.clone();
        dx.add_assign(&self.query.backward(&dq));
        dx.add_assign(&self.key.backward(&dk));
        dx.add_assign(&self.value.backward(&dv));
        dx
    }

    fn params(&self) -> Vec<&Param<T>> {
        let mut p = self.query.params();
        p.extend(self.key.params());
        p.extend(self.value.params());
        p.push(&self.gamma);
        p
    }

    fn params_mut(&mut self) -> Vec<&mut Param<T>> {
        let mut p = self.query.params_mut();
        p.extend(self.key.params_mut());
        p.extend(self.value.params_mut());
        p.push(&mut self.gamma);
        p
    }
}
