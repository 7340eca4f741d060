//! Conditional discriminator: strided convolutions, then a dense head to one logit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::fingerprint_json;
use crate::layers::activation::{sigmoid, LeakyRelu};
use crate::layers::conv::{Conv2d, ConvGeometry};
use crate::layers::linear::Linear;
use crate::layers::norm::BatchNorm2d;
use crate::param::{count_trainable, Ctx, Layer, Param};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscriminatorSpec {
    /// Condition channels plus one candidate channel.
    pub in_channels: usize,
    pub levels: usize,
    pub base_channels: usize,
    pub max_channels: usize,
    pub image_size: usize,
    pub leaky_slope: f64,
}

impl DiscriminatorSpec {
    /// Default discriminator for a generator taking `condition_channels` inputs.
    pub fn for_condition(condition_channels: usize, image_size: usize) -> Self {
        Self {
            in_channels: condition_channels + 1,
            levels: 4,
            base_channels: 64,
            max_channels: 384,
            image_size,
            leaky_slope: 0.2,
        }
    }

    pub fn channels(&self, i: usize) -> usize {
        (self.base_channels << i.min(30)).min(self.max_channels)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Validation(m));
        if self.levels == 0 {
            return fail("discriminator needs at least one level".into());
        }
        if self.in_channels < 2 || self.base_channels == 0 || self.max_channels == 0 {
            return fail("discriminator channel counts invalid".into());
        }
        let unit = 1usize << self.levels;
        if self.image_size == 0 || self.image_size % unit != 0 {
            return fail(format!("image size {} is not a multiple of 2^levels = {unit}", self.image_size));
        }
        if !(self.leaky_slope > 0.0) {
            return fail(format!("leaky slope must be positive, got {}", self.leaky_slope));
        }
        Ok(())
    }

    pub fn fingerprint(&self) -> String {
        fingerprint_json(self)
    }
}

struct DownLevel<T> {
    conv: Conv2d<T>,
    bn: Option<BatchNorm2d<T>>,
    act: LeakyRelu<T>,
}

pub struct Discriminator<T> {
    spec: DiscriminatorSpec,
    levels: Vec<DownLevel<T>>,
    head: Linear<T>,
}

impl<T: Scalar> Discriminator<T> {
    pub fn new(spec: DiscriminatorSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let geometry = ConvGeometry::new(4, 2, 1);
        let mut prev = spec.in_channels;
        let mut levels = Vec::with_capacity(spec.levels);
        for i in 0..spec.levels {
            let c = spec.channels(i);
            levels.push(DownLevel {
                conv: Conv2d::new(prev, c, geometry, &mut rng),
                bn: (i > 0).then(|| BatchNorm2d::new(c, &mut rng)),
                act: LeakyRelu::new(T::lit(spec.leaky_slope)),
            });
            prev = c;
        }
        let side = spec.image_size >> spec.levels;
        let head = Linear::new(prev * side * side, 1, &mut rng);
        Ok(Self { spec, levels, head })
    }

    pub fn spec(&self) -> &DiscriminatorSpec {
        &self.spec
    }

    /// Joins a condition stack and a candidate map into one discriminator input.
    pub fn join(&self, condition: &Tensor<T>, candidate: &Tensor<T>) -> Result<Tensor<T>> {
        let [n, c, h, w] = condition.shape();
        if candidate.shape() != [n, 1, h, w] {
            return Err(Error::Validation(format!(
                "candidate shape {:?} does not match condition {:?}",
                candidate.shape(),
                condition.shape()
            )));
        }
        if c + 1 != self.spec.in_channels || h != self.spec.image_size || w != self.spec.image_size {
            return Err(Error::Validation(format!(
                "discriminator expects {} condition channels at {1}x{1}, got {c} at {h}x{w}",
                self.spec.in_channels - 1,
                self.spec.image_size
            )));
        }
        Tensor::concat_channels(condition, candidate)
    }

    /// One logit per sample.
    pub fn logits(&mut self, condition: &Tensor<T>, candidate: &Tensor<T>, ctx: &mut Ctx) -> Result<Vec<T>> {
        let x = self.join(condition, candidate)?;
        Ok(self.forward(&x, ctx).into_vec())
    }

    /// One probability in `(0, 1)` per sample.
    pub fn probabilities(&mut self, condition: &Tensor<T>, candidate: &Tensor<T>, ctx: &mut Ctx) -> Result<Vec<T>> {
        Ok(self.logits(condition, candidate, ctx)?.into_iter().map(sigmoid).collect())
    }

    /// Backpropagates per-sample logit gradients; returns the gradient with
    /// respect to the candidate channel only.
    pub fn backward_logits(&mut self, dlogits: &[T]) -> Tensor<T> {
        let g = Tensor::from_vec([dlogits.len(), 1, 1, 1], dlogits.to_vec()).expect("one logit per sample");
        let dx = self.backward(&g);
        dx.split_channels(self.spec.in_channels - 1).1
    }

    pub fn count_parameters(&self) -> usize {
        count_trainable(&self.params())
    }
}

impl<T: Scalar> Layer<T> for Discriminator<T> {
    fn forward(&mut self, x: &Tensor<T>, ctx: &mut Ctx) -> Tensor<T> {
        let mut h = x.clone();
        for level in &mut self.levels {
            h = level.conv.forward(&h, ctx);
            if let Some(bn) = &mut level.bn {
                h = bn.forward(&h, ctx);
            }
            h = level.act.forward(&h, ctx);
        }
        self.head.forward(&h, ctx)
    }

    fn backward(&mut self, grad_out: &Tensor<T>) -> Tensor<T> {
        let mut g = self.head.backward(grad_out);
        for level in self.levels.iter_mut().rev() {
            g = level.act.backward(&g);
            if let Some(bn) = &mut level.bn {
                g = bn.backward(&g);
            }
            g = level.conv.backward(&g);
        }
        g
    }

    fn params(&self) -> Vec<&Param<T>> {
        let mut p = Vec::new();
        for level in &self.levels {
            p.extend(level.conv.params());
            p.extend(level.bn.iter().flat_map(|b| b.params()));
        }
        p.extend(self.head.params());
        p
    }

    fn params_mut(&mut self) -> Vec<&mut Param<T>> {
        let mut p = Vec::new();
        for level in &mut self.levels {
            p.extend(level.conv.params_mut());
            p.extend(level.bn.iter_mut().flat_map(|b| b.params_mut()));
        }
        p.extend(self.head.params_mut());
        p
    }
}
