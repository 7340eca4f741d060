use fptc_nn::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn block(shape: [usize; 4], seed: u64) -> Tensor<f64> {
    Tensor::from_fn(shape, |i| ((i as u64 * 2654435761 + seed) % 1000) as f64 / 500.0 - 1.0)
}

#[test]
fn zero_gamma_is_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut sa = SelfAttention::<f64>::new(16, &mut rng);
    let x = block([2, 16, 4, 4], 3);
    assert_eq!(sa.forward(&x, &mut Ctx::eval()), x);
}

#[test]
fn rows_sum_to_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut sa = SelfAttention::<f64>::new(8, &mut rng);
    sa.forward(&block([1, 8, 5, 3], 1), &mut Ctx::eval());
    for a in sa.last_attention().unwrap() {
        for row in a.chunks(15) {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn equal_values_pass_through_attention() {
    // Zero value weights with bias b make every value vector equal to b.
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut sa = SelfAttention::<f64>::new(8, &mut rng);
    sa.value.weight.value.iter_mut().for_each(|w| *w = 0.0);
    sa.value.bias.value = (0..8).map(|c| c as f64 * 0.1 - 0.3).collect();
    sa.set_gamma(1.0);
    let x = block([1, 8, 4, 4], 5);
    let y = sa.forward(&x, &mut Ctx::eval());
    for ch in 0..8 {
        for p in 0..16 {
            let expect = x.data()[ch * 16 + p] + sa.value.bias.value[ch];
            assert!((y.data()[ch * 16 + p] - expect).abs() < 1e-12);
        }
    }
}

#[test]
fn single_position_adds_gated_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut sa = SelfAttention::<f64>::new(8, &mut rng);
    sa.set_gamma(0.7);
    let x = block([1, 8, 1, 1], 9);
    let y = sa.forward(&x, &mut Ctx::eval());
    for co in 0..8 {
        let value: f64 =
            (0..8).map(|ci| sa.value.weight.value[co * 8 + ci] * x.data()[ci]).sum::<f64>() + sa.value.bias.value[co];
        assert!((y.data()[co] - (x.data()[co] + 0.7 * value)).abs() < 1e-12);
    }
}

#[test]
fn channel_mismatch_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut sa = SelfAttention::<f64>::new(8, &mut rng);
    assert!(sa.try_forward(&block([1, 4, 2, 2], 0), &mut Ctx::eval()).is_err());
}
