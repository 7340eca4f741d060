use approx::assert_abs_diff_eq;
use fptc_nn::{
    adversarial_loss, discriminator_step, generator_adversarial, reconstruction_grad, reconstruction_loss, Adam,
    AdamConfig, Param, Tensor64,
};
use proptest::prelude::*;

fn map(values: &[f64]) -> Tensor64 {
    Tensor64::from_vec([1, 1, 1, values.len()], values.to_vec()).unwrap()
}

#[test]
fn adversarial_loss_reference_values() {
    assert_abs_diff_eq!(adversarial_loss(&[0.5], &[0.5]).unwrap(), -2.0 * 2f64.ln(), epsilon = 1e-12);
    assert_abs_diff_eq!(adversarial_loss(&[0.5], &[0.5]).unwrap(), -1.38629, epsilon = 1e-5);
    assert_abs_diff_eq!(adversarial_loss(&[0.9, 0.9], &[0.1, 0.1]).unwrap(), 2.0 * 0.9f64.ln(), epsilon = 1e-12);
    assert_abs_diff_eq!(adversarial_loss(&[0.9], &[0.1]).unwrap(), -0.21072, epsilon = 1e-5);
    // Limit of a perfect discriminator, reached up to the log clamp.
    assert_abs_diff_eq!(adversarial_loss(&[1.0], &[0.0]).unwrap(), 0.0, epsilon = 1e-6);
}

#[test]
fn adversarial_loss_domain_errors() {
    assert!(adversarial_loss(&[1.5], &[0.5]).is_err());
    assert!(adversarial_loss(&[0.5], &[-0.1]).is_err());
    assert!(adversarial_loss(&[f64::NAN], &[0.5]).is_err());
    assert!(adversarial_loss::<f64>(&[], &[]).is_err());
    assert!(adversarial_loss(&[0.5, 0.5], &[0.5]).is_err());
}

#[test]
fn adversarial_loss_maximized_at_grid_corner() {
    let delta = 0.01;
    let grid: Vec<f64> = (0..=98).map(|i| delta + i as f64 * 0.01).collect();
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for &r in &grid {
        for &f in &grid {
            let v = adversarial_loss(&[r], &[f]).unwrap();
            if v > best.0 {
                best = (v, r, f);
            }
        }
    }
    assert_abs_diff_eq!(best.1, 1.0 - delta, epsilon = 1e-12);
    assert_abs_diff_eq!(best.2, delta, epsilon = 1e-12);
}

#[test]
fn reconstruction_loss_reference_values() {
    assert_eq!(reconstruction_loss(&map(&[0.3, 0.7]), &map(&[0.3, 0.7])).unwrap(), 0.0);
    assert_abs_diff_eq!(
        reconstruction_loss(&map(&[0.1, 0.5, 0.9]), &map(&[0.35, 0.75, 1.15])).unwrap(),
        0.0625,
        epsilon = 1e-12
    );
    assert_abs_diff_eq!(reconstruction_loss(&map(&[1.0, 2.0]), &map(&[1.0, 4.0])).unwrap(), 2.0, epsilon = 1e-12);
    assert!(reconstruction_loss(&map(&[1.0]), &map(&[1.0, 2.0])).is_err());
}

#[test]
fn logit_objectives_match_probability_form() {
    let real = [2.0, -0.5, 0.3];
    let fake = [-1.0, 0.7, 4.0];
    let sig = |x: f64| 1.0 / (1.0 + (-x).exp());
    let step = discriminator_step(&real, &fake);
    let pr: Vec<f64> = real.iter().map(|&l| sig(l)).collect();
    let pf: Vec<f64> = fake.iter().map(|&l| sig(l)).collect();
    assert_abs_diff_eq!(step.loss, -adversarial_loss(&pr, &pf).unwrap(), epsilon = 1e-12);

    let h = 1e-6;
    for i in 0..3 {
        let mut up = real;
        up[i] += h;
        let mut down = real;
        down[i] -= h;
        let fd = (discriminator_step(&up, &fake).loss - discriminator_step(&down, &fake).loss) / (2.0 * h);
        assert_abs_diff_eq!(step.grad_real[i], fd, epsilon = 1e-8);
        let mut up = fake;
        up[i] += h;
        let mut down = fake;
        down[i] -= h;
        let fd = (discriminator_step(&real, &up).loss - discriminator_step(&real, &down).loss) / (2.0 * h);
        assert_abs_diff_eq!(step.grad_fake[i], fd, epsilon = 1e-8);
    }

    let (loss, grad) = generator_adversarial(&fake);
    assert_abs_diff_eq!(loss, -pf.iter().map(|p| p.ln()).sum::<f64>() / 3.0, epsilon = 1e-12);
    for i in 0..3 {
        let mut up = fake;
        up[i] += h;
        let mut down = fake;
        down[i] -= h;
        let fd = (generator_adversarial(&up).0 - generator_adversarial(&down).0) / (2.0 * h);
        assert_abs_diff_eq!(grad[i], fd, epsilon = 1e-8);
    }
    // Extreme logits stay finite.
    assert!(discriminator_step(&[800.0f64], &[-800.0]).loss.is_finite());
    assert!(generator_adversarial(&[-800.0f64]).0.is_finite());
}

#[test]
fn adam_first_steps_match_hand_computation() {
    let cfg = AdamConfig { learning_rate: 0.1, beta1: 0.9, beta2: 0.99, eps: 1e-8 };
    let mut adam = Adam::new(cfg);
    let mut p = Param::trainable("w", vec![1.0f64, -2.0]);
    let mut buf = Param::buffer("stat", vec![5.0f64]);
    p.grad = vec![0.5, -3.0];
    adam.step(vec![&mut p, &mut buf]);
    // First bias-corrected step moves each weight by lr * g / (|g| + eps).
    assert_abs_diff_eq!(p.value[0], 1.0 - 0.1, epsilon = 1e-7);
    assert_abs_diff_eq!(p.value[1], -2.0 + 0.1, epsilon = 1e-7);
    assert_eq!(buf.value, vec![5.0]);

    let after_first = p.value[0];
    p.grad = vec![1.0, 0.0];
    adam.step(vec![&mut p, &mut buf]);
    let (m, v): (f64, f64) = (0.9 * 0.05 + 0.1 * 1.0, 0.99 * 0.0025 + 0.01 * 1.0);
    let (mh, vh) = (m / (1.0 - 0.81), v / (1.0 - 0.9801));
    assert_abs_diff_eq!(p.value[0], after_first - 0.1 * mh / (vh.sqrt() + 1e-8), epsilon = 1e-12);
    assert_eq!(adam.steps(), 2);
}

proptest! {
    #[test]
    fn reconstruction_loss_nonnegative_zero_iff_equal(a in prop::collection::vec(-5.0f64..5.0, 1..20), shift in prop::collection::vec(-1.0f64..1.0, 20)) {
        let b: Vec<f64> = a.iter().zip(&shift).map(|(x, s)| x + s).collect();
        let l = reconstruction_loss(&map(&a), &map(&b)).unwrap();
        prop_assert!(l >= 0.0);
        prop_assert_eq!(l == 0.0, a == b);
        prop_assert_eq!(reconstruction_loss(&map(&a), &map(&a)).unwrap(), 0.0);
    }

    #[test]
    fn reconstruction_grad_matches_difference(a in prop::collection::vec(-1.0f64..1.0, 1..8), b in prop::collection::vec(-1.0f64..1.0, 8)) {
        let b = &b[..a.len()];
        let g = reconstruction_grad(&map(&a), &map(b));
        let n = a.len() as f64;
        for i in 0..a.len() {
            prop_assert!((g.data()[i] - 2.0 * (b[i] - a[i]) / n).abs() < 1e-12);
        }
    }
}
