//! Adversarial and reconstruction objectives.

use crate::error::{Error, Result};
use crate::layers::activation::sigmoid;
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Probabilities are clamped to `[PROB_CLAMP, 1 - PROB_CLAMP]` before taking logs.
pub const PROB_CLAMP: f64 = 1e-7;

fn check_probabilities<T: Scalar>(name: &str, values: &[T]) -> Result<()> {
    match values.iter().find(|p| !(**p >= T::zero() && **p <= T::one())) {
        Some(p) => Err(Error::Domain(format!("{name} probability {p} outside [0, 1]"))),
        None if values.is_empty() => Err(Error::Domain(format!("{name} is empty"))),
        None => Ok(()),
    }
}

/// Batch mean of `ln d_real + ln(1 - d_fake)`, the value the discriminator maximizes.
pub fn adversarial_loss<T: Scalar>(d_real: &[T], d_fake: &[T]) -> Result<T> {
    check_probabilities("d_real", d_real)?;
    check_probabilities("d_fake", d_fake)?;
    if d_real.len() != d_fake.len() {
        return Err(Error::Domain(format!("batch sizes differ: {} vs {}", d_real.len(), d_fake.len())));
    }
    let lo = T::lit(PROB_CLAMP);
    let hi = T::one() - lo;
    let total: T =
        d_real.iter().zip(d_fake).map(|(r, f)| r.max(lo).min(hi).ln() + (T::one() - f.max(lo).min(hi)).ln()).sum();
    Ok(total / T::from_usize_lossy(d_real.len()))
}

/// Mean squared difference between target and generated maps.
pub fn reconstruction_loss<T: Scalar>(target: &Tensor<T>, generated: &Tensor<T>) -> Result<T> {
    if target.shape() != generated.shape() {
        return Err(Error::Validation(format!(
            "shape mismatch: target {:?}, generated {:?}",
            target.shape(),
            generated.shape()
        )));
    }
    if target.is_empty() {
        return Err(Error::Validation("empty maps".into()));
    }
    let ss: T = target.data().iter().zip(generated.data()).map(|(t, g)| (*t - *g) * (*t - *g)).sum();
    Ok(ss / T::from_usize_lossy(target.len()))
}

/// Gradient of [`reconstruction_loss`] with respect to `generated`.
pub fn reconstruction_grad<T: Scalar>(target: &Tensor<T>, generated: &Tensor<T>) -> Tensor<T> {
    let scale = T::lit(2.0) / T::from_usize_lossy(target.len());
    generated.zip_map(target, |g, t| scale * (g - t))
}

/// `ln(sigmoid(x))` without overflow.
fn log_sigmoid<T: Scalar>(x: T) -> T {
    if x >= T::zero() {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// Binary cross-entropy of logits against an all-real (`true`) or all-fake
/// (`false`) label, averaged over the batch, with its logit gradient.
pub fn bce_with_logits<T: Scalar>(logits: &[T], real: bool) -> (T, Vec<T>) {
    let n = T::from_usize_lossy(logits.len());
    let sign = if real { T::one() } else { -T::one() };
    let loss = logits.iter().map(|&l| -log_sigmoid(sign * l)).sum::<T>() / n;
    let target = if real { T::one() } else { T::zero() };
    (loss, logits.iter().map(|&l| (sigmoid(l) - target) / n).collect())
}

/// Discriminator minimization objective on logits.
pub struct DiscriminatorStep<T> {
    /// `-(mean ln D(real) + mean ln(1 - D(fake)))`.
    pub loss: T,
    pub grad_real: Vec<T>,
    pub grad_fake: Vec<T>,
}

pub fn discriminator_step<T: Scalar>(real_logits: &[T], fake_logits: &[T]) -> DiscriminatorStep<T> {
    let (loss_real, grad_real) = bce_with_logits(real_logits, true);
    let (loss_fake, grad_fake) = bce_with_logits(fake_logits, false);
    DiscriminatorStep { loss: loss_real + loss_fake, grad_real, grad_fake }
}

/// Non-saturating generator objective `-mean ln D(G(x))` and its logit gradient.
pub fn generator_adversarial<T: Scalar>(fake_logits: &[T]) -> (T, Vec<T>) {
    bce_with_logits(fake_logits, true)
}
