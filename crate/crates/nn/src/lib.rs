//! Conditional GAN building blocks for radio-map prediction and correction.
//!
//! Every layer implements [`Layer`] with an explicit backward pass; training
//! code chains `forward`, a loss gradient and `backward`, then hands the
//! accumulated gradients to [`Adam`]. All computation is single-threaded and
//! deterministic for a given seed.
//!
//! ```
//! use fptc_nn::{Ctx, Generator32, GeneratorSpec, Layer, Tensor};
//!
//! let spec = GeneratorSpec { base_channels: 4, max_channels: 8, levels: 3, sa_resolutions: vec![4], ..GeneratorSpec::predict(16) };
//! let mut g = Generator32::new(spec, 7).unwrap();
//! let y = g.forward(&Tensor::zeros([1, 4, 16, 16]), &mut Ctx::eval());
//! assert_eq!(y.shape(), [1, 1, 16, 16]);
//! ```

pub mod adam;
pub mod discriminator;
pub mod error;
pub mod generator;
mod init;
pub mod layers;
pub mod loss;
pub mod param;
pub mod scalar;
pub mod tensor;

pub use adam::{Adam, AdamConfig};
pub use discriminator::{Discriminator, DiscriminatorSpec};
pub use error::{Error, Result};
pub use generator::{Generator, GeneratorSpec, DROPOUT_LEVELS};
pub use layers::attention::SelfAttention;
pub use layers::residual::ResidualBlock;
pub use loss::{
    adversarial_loss, bce_with_logits, discriminator_step, generator_adversarial, reconstruction_grad,
    reconstruction_loss,
};
pub use param::{count_trainable, export_state, import_state, zero_grads, Ctx, Layer, Mode, Param, ParamKind};
pub use scalar::Scalar;
pub use tensor::Tensor;

pub type Tensor32 = Tensor<f32>;
pub type Tensor64 = Tensor<f64>;
pub type Generator32 = Generator<f32>;
pub type Generator64 = Generator<f64>;
pub type Discriminator32 = Discriminator<f32>;
pub type Discriminator64 = Discriminator<f64>;
