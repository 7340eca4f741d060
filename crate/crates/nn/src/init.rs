use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::scalar::Scalar;

pub(crate) fn normal_vec<T: Scalar>(rng: &mut ChaCha8Rng, n: usize, mean: f64, std: f64) -> Vec<T> {
    (0..n).map(|_| T::lit(mean + std * rng.sample::<f64, _>(StandardNormal))).collect()
}
