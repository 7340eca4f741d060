//! Encoder-decoder generator with skip connections.
//!
//! Encoder level `i` halves the side with a 4x4 stride-2 convolution, then
//! applies batch normalization (not on level 0) and LeakyReLU. Decoder level
//! `i` doubles the side with a transposed convolution, then batch
//! normalization, dropout on the three deepest levels, and ReLU. Its output
//! is concatenated with encoder level `i - 1`. The outermost decoder level
//! emits one channel and a sigmoid.
//!
//! Self-attention follows any encoder or decoder level whose output side is
//! listed in `sa_resolutions`. Residual blocks sit at the bottleneck.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::layers::activation::{Dropout, LeakyRelu, Relu, Sigmoid};
use crate::layers::attention::SelfAttention;
use crate::layers::conv::{Conv2d, ConvGeometry, ConvTranspose2d};
use crate::layers::norm::BatchNorm2d;
use crate::layers::residual::ResidualBlock;
use crate::param::{count_trainable, Ctx, Layer, Param};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

const DOWN: ConvGeometry = ConvGeometry::new(4, 2, 1);

/// Number of decoder levels, counted from the bottleneck, that apply dropout.
pub const DROPOUT_LEVELS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub in_channels: usize,
    pub levels: usize,
    pub base_channels: usize,
    /// Channel widths double per level up to this cap.
    pub max_channels: usize,
    /// Side length of the square input the network is built for.
    pub image_size: usize,
    pub sa_resolutions: Vec<usize>,
    pub rc_block_count: usize,
    pub dropout_rate: f64,
    pub leaky_slope: f64,
}

impl GeneratorSpec {
    /// Prediction-stage defaults: 4 input channels, self-attention at side 32.
    pub fn predict(image_size: usize) -> Self {
        Self {
            in_channels: 4,
            levels: 6,
            base_channels: 64,
            max_channels: 384,
            image_size,
            sa_resolutions: vec![32],
            rc_block_count: 0,
            dropout_rate: 0.5,
            leaky_slope: 0.2,
        }
    }

    /// Correction-stage defaults: 3 input channels, two residual blocks.
    pub fn correct(image_size: usize) -> Self {
        Self { in_channels: 3, sa_resolutions: Vec::new(), rc_block_count: 2, ..Self::predict(image_size) }
    }

    /// Output channels of encoder level `i`.
    pub fn channels(&self, i: usize) -> usize {
        (self.base_channels << i.min(30)).min(self.max_channels)
    }

    /// Side length after encoder level `i`.
    pub fn side(&self, i: usize) -> usize {
        self.image_size >> (i + 1)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Validation(m));
        if self.levels < 3 {
            return fail(format!("levels must be at least 3, got {}", self.levels));
        }
        if self.in_channels == 0 || self.base_channels == 0 || self.max_channels == 0 {
            return fail("channel counts must be positive".into());
        }
        let unit = 1usize << self.levels;
        if self.image_size == 0 || self.image_size % unit != 0 {
            return fail(format!("image size {} is not a multiple of 2^levels = {unit}", self.image_size));
        }
        if self.sa_resolutions.is_empty() == (self.rc_block_count == 0) {
            return fail("exactly one of sa_resolutions and rc_block_count must be set".into());
        }
        for &r in &self.sa_resolutions {
            if !(0..self.levels).any(|i| self.side(i) == r) {
                return fail(format!("no feature map of side {r} for self-attention"));
            }
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return fail(format!("dropout rate {} outside [0, 1)", self.dropout_rate));
        }
        if !(self.leaky_slope > 0.0) {
            return fail(format!("leaky slope must be positive, got {}", self.leaky_slope));
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn fingerprint(&self) -> String {
        fingerprint_json(self)
    }
}

pub(crate) fn fingerprint_json<S: Serialize>(spec: &S) -> String {
    let json = serde_json::to_vec(spec).expect("spec serializes");
    hex::encode(Sha256::digest(&json))
}

struct EncoderLevel<T> {
    conv: Conv2d<T>,
    bn: Option<BatchNorm2d<T>>,
    act: LeakyRelu<T>,
    sa: Option<SelfAttention<T>>,
}

impl<T: Scalar> EncoderLevel<T> {
    fn forward(&mut self, x: &Tensor<T>, ctx: &mut Ctx) -> Tensor<T> {
        let mut h = self.conv.forward(x, ctx);
        if let Some(bn) = &mut self.bn {
            h = bn.forward(&h, ctx);
        }
        h = self.act.forward(&h, ctx);
        if let Some(sa) = &mut self.sa {
            h = sa.forward(&h, ctx);
        }
        h
    }

    fn backward(&mut self, g: &Tensor<T>) -> Tensor<T> {
        let mut g = g.clone();
        if let Some(sa) = &mut self.sa {
            g = sa.backward(&g);
        }
        g = self.act.backward(&g);
        if let Some(bn) = &mut self.bn {
            g = bn.backward(&g);
        }
        self.conv.backward(&g)
    }

    fn params(&self) -> Vec<&Param<T>> {
        let mut p = self.conv.params();
        p.extend(self.bn.iter().flat_map(|b| b.params()));
        p.extend(self.sa.iter().flat_map(|s| s.params()));
        p
    }

    fn params_mut(&mut self) -> Vec<&mut Param<T>> {
        let mut p = self.conv.params_mut();
        p.extend(self.bn.iter_mut().flat_map(|b| b.params_mut()));
        p.extend(self.sa.iter_mut().flat_map(|s| s.params_mut()));
        p
    }
}

struct DecoderLevel<T> {
    deconv: ConvTranspose2d<T>,
    bn: BatchNorm2d<T>,
    dropout: Option<Dropout<T>>,
    act: Relu<T>,
    sa: Option<SelfAttention<T>>,
}

impl<T: Scalar> DecoderLevel<T> {
    fn forward(&mut self, x: &Tensor<T>, ctx: &mut Ctx) -> Tensor<T> {
        let mut h = self.deconv.forward(x, ctx);
        h = self.bn.forward(&h, ctx);
        if let Some(d) = &mut self.dropout {
            h = d.forward(&h, ctx);
        }
        h = self.act.forward(&h, ctx);
        if let Some(sa) = &mut self.sa {
            h = sa.forward(&h, ctx);
        }
        h
    }

    fn backward(&mut self, g: &Tensor<T>) -> Tensor<T> {
        let mut g = g.clone();
        if let Some(sa) = &mut self.sa {
            g = sa.backward(&g);
        }
        g = self.act.backward(&g);
        if let Some(d) = &mut self.dropout {
            g = d.backward(&g);
        }
        g = self.bn.backward(&g);
        self.deconv.backward(&g)
    }

    fn params(&self) -> Vec<&Param<T>> {
        let mut p = self.deconv.params();
        p.extend(self.bn.params());
        p.extend(self.sa.iter().flat_map(|s| s.params()));
        p
    }

    fn params_mut(&mut self) -> Vec<&mut Param<T>> {
        let mut p = self.deconv.params_mut();
        p.extend(self.bn.params_mut());
        p.extend(self.sa.iter_mut().flat_map(|s| s.params_mut()));
        p
    }
}

pub struct Generator<T> {
    spec: GeneratorSpec,
    encoder: Vec<EncoderLevel<T>>,
    bottleneck: Vec<ResidualBlock<T>>,
    /// Indexed by level; `decoder[0]` is the outermost.
    decoder: Vec<DecoderLevel<T>>,
    head: ConvTranspose2d<T>,
    out: Sigmoid<T>,
}

impl<T: Scalar> Generator<T> {
    pub fn new(spec: GeneratorSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let slope = T::lit(spec.leaky_slope);
        let levels = spec.levels;
        let wants_sa = |side: usize| spec.sa_resolutions.contains(&side);

        let mut encoder = Vec::with_capacity(levels);
        let mut prev = spec.in_channels;
        for i in 0..levels {
            let c = spec.channels(i);
            encoder.push(EncoderLevel {
                conv: Conv2d::new(prev, c, DOWN, &mut rng),
                bn: (i > 0).then(|| BatchNorm2d::new(c, &mut rng)),
                act: LeakyRelu::new(slope),
                sa: wants_sa(spec.side(i)).then(|| SelfAttention::new(c, &mut rng)),
            });
            prev = c;
        }
        let bottleneck_ch = spec.channels(levels - 1);
        let bottleneck = (0..spec.rc_block_count).map(|_| ResidualBlock::new(bottleneck_ch, &mut rng)).collect();

        let mut decoder: Vec<Option<DecoderLevel<T>>> = (0..levels).map(|_| None).collect();
        for i in (1..levels).rev() {
            let cin = if i == levels - 1 { spec.channels(i) } else { 2 * spec.channels(i) };
            let cout = spec.channels(i - 1);
            let rate = T::lit(spec.dropout_rate);
            decoder[i] = Some(DecoderLevel {
                deconv: ConvTranspose2d::new(cin, cout, DOWN, &mut rng),
                bn: BatchNorm2d::new(cout, &mut rng),
                dropout: (levels - i <= DROPOUT_LEVELS && spec.dropout_rate > 0.0).then(|| Dropout::new(rate)),
                act: Relu::new(),
                sa: wants_sa(spec.side(i - 1)).then(|| SelfAttention::new(cout, &mut rng)),
            });
        }
        let decoder = decoder.into_iter().skip(1).map(|d| d.expect("built above")).collect();
        let head = ConvTranspose2d::new(2 * spec.channels(0), 1, DOWN, &mut rng);
        Ok(Self { spec, encoder, bottleneck, decoder, head, out: Sigmoid::new() })
    }

    pub fn spec(&self) -> &GeneratorSpec {
        &self.spec
    }

    fn decoder_level(&mut self, i: usize) -> &mut DecoderLevel<T> {
        &mut self.decoder[i - 1]
    }

    pub fn check_input(&self, x: &Tensor<T>) -> Result<()> {
        let [n, c, h, w] = x.shape();
        if n == 0 {
            return Err(Error::Validation("empty batch".into()));
        }
        if c != self.spec.in_channels {
            return Err(Error::Validation(format!("generator expects {} channels, got {c}", self.spec.in_channels)));
        }
        if h != self.spec.image_size || w != self.spec.image_size {
            return Err(Error::Validation(format!(
                "generator built for {0}x{0} inputs, got {h}x{w}",
                self.spec.image_size
            )));
        }
        Ok(())
    }

    /// Shape-checked forward pass returning a `[n, 1, H, W]` block in `[0, 1]`.
    pub fn try_forward(&mut self, x: &Tensor<T>, ctx: &mut Ctx) -> Result<Tensor<T>> {
        self.check_input(x)?;
        Ok(self.forward(x, ctx))
    }

    /// Self-attention layers in network order.
    pub fn attention_layers(&self) -> Vec<&SelfAttention<T>> {
        let enc = self.encoder.iter().filter_map(|l| l.sa.as_ref());
        let dec = self.decoder.iter().rev().filter_map(|l| l.sa.as_ref());
        enc.chain(dec).collect()
    }

    pub fn residual_block_count(&self) -> usize {
        self.bottleneck.len()
    }

    pub fn count_parameters(&self) -> usize {
        count_trainable(&self.params())
    }
}

impl<T: Scalar> Layer<T> for Generator<T> {
    fn forward(&mut self, x: &Tensor<T>, ctx: &mut Ctx) -> Tensor<T> {
        let levels = self.spec.levels;
        let mut skips = Vec::with_capacity(levels);
        let mut h = x.clone();
        for level in &mut self.encoder {
            h = level.forward(&h, ctx);
            skips.push(h.clone());
        }
        for block in &mut self.bottleneck {
            h = block.forward(&h, ctx);
        }
        for i in (1..levels).rev() {
            h = self.decoder_level(i).forward(&h, ctx);
            h = Tensor::concat_channels(&h, &skips[i - 1]).expect("matching skip shape");
        }
        let logits = self.head.forward(&h, ctx);
        self.out.forward(&logits, ctx)
    }

    fn backward(&mut self, grad_out: &Tensor<T>) -> Tensor<T> {
        let levels = self.spec.levels;
        let mut skip_grads: Vec<Option<Tensor<T>>> = (0..levels).map(|_| None).collect();
        let g = self.out.backward(grad_out);
        let mut g = self.head.backward(&g);
        for i in 1..levels {
            let (up, skip) = g.split_channels(g.channels() / 2);
            skip_grads[i - 1] = Some(skip);
            g = self.decoder_level(i).backward(&up);
        }
        for block in self.bottleneck.iter_mut().rev() {
            g = block.backward(&g);
        }
        for i in (0..levels).rev() {
            if let Some(s) = skip_grads[i].take() {
                g.add_assign(&s);
            }
            g = self.encoder[i].backward(&g);
        }
        g
    }

    fn params(&self) -> Vec<&Param<T>> {
        let mut p: Vec<&Param<T>> = self.encoder.iter().flat_map(|l| l.params()).collect();
        p.extend(self.bottleneck.iter().flat_map(|b| b.params()));
        p.extend(self.decoder.iter().rev().flat_map(|l| l.params()));
        p.extend(self.head.params());
        p
    }

    fn params_mut(&mut self) -> Vec<&mut Param<T>> {
        let mut p: Vec<&mut Param<T>> = self.encoder.iter_mut().flat_map(|l| l.params_mut()).collect();
        p.extend(self.bottleneck.iter_mut().flat_map(|b| b.params_mut()));
        p.extend(self.decoder.iter_mut().rev().flat_map(|l| l.params_mut()));
        p.extend(self.head.params_mut());
        p
    }
}
