use approx::assert_abs_diff_eq;
use fptc_core::grid::{Grid2, GridSpec};
use fptc_core::metrics::*;
use fptc_core::*;

fn map(w: usize, h: usize, v: Vec<f64>) -> RadioMap<f64> {
    RadioMap::new(GridSpec::new(w, h, 1.0).unwrap(), Grid2::from_vec(w, h, v).unwrap()).unwrap()
}

#[test]
fn rmse_hand_value() {
    assert_abs_diff_eq!(rmse(&map(2, 1, vec![0.0, 0.0]), &map(2, 1, vec![3.0, 4.0])).unwrap(), 12.5f64.sqrt());
}

#[test]
fn mae_hand_value() {
    assert_abs_diff_eq!(mae(&map(3, 1, vec![1.0, 2.0, 3.0]), &map(3, 1, vec![2.0, 4.0, 0.0])).unwrap(), 2.0);
}

#[test]
fn constant_offset() {
    let a = map(4, 4, (0..16).map(|i| -80.0 + i as f64).collect());
    let b = map(4, 4, (0..16).map(|i| -80.0 + i as f64 - 2.5).collect());
    assert_abs_diff_eq!(rmse(&a, &b).unwrap(), 2.5, epsilon = 1e-12);
    assert_abs_diff_eq!(mae(&a, &b).unwrap(), 2.5, epsilon = 1e-12);
    assert_eq!(rmse(&a, &a).unwrap(), 0.0);
}

#[test]
fn shape_mismatch() {
    assert!(rmse(&map(2, 1, vec![0.0; 2]), &map(1, 2, vec![0.0; 2])).is_err());
    assert!(mae(&map(2, 1, vec![0.0; 2]), &map(3, 1, vec![0.0; 3])).is_err());
}

#[test]
fn ssim_of_constant_images() {
    let a = vec![100.0; 16 * 16];
    let b = vec![150.0; 16 * 16];
    let expected = (2.0 * 15000.0 + 6.5025) / (32500.0 + 6.5025);
    assert_abs_diff_eq!(ssim_pixels(&a, &b, 16, 16).unwrap(), expected, epsilon = 1e-12);
    assert_abs_diff_eq!(expected, 0.92309, epsilon = 1e-5);
}

#[test]
fn ssim_identical_is_one_and_small_image_rejected() {
    let a: Vec<f64> = (0..256).map(|i| (i * 37 % 255) as f64).collect();
    assert_abs_diff_eq!(ssim_pixels(&a, &a, 16, 16).unwrap(), 1.0, epsilon = 1e-12);
    assert!(ssim_pixels(&a[..100], &a[..100], 10, 10).is_err());
}

#[test]
fn psnr_uniform_error() {
    let a = vec![100.0; 64];
    let b = vec![116.0; 64];
    assert_abs_diff_eq!(psnr_pixels(&a, &b), 10.0 * (255f64.powi(2) / 256.0).log10(), epsilon = 1e-12);
    assert_abs_diff_eq!(psnr_pixels(&a, &b), 24.0484, epsilon = 1e-3);
    let c = vec![132.0; 64];
    assert_abs_diff_eq!(psnr_pixels(&a, &b) - psnr_pixels(&a, &c), 20.0 * 2f64.log10(), epsilon = 1e-9);
    assert!(psnr_pixels(&a, &a).is_infinite());
}

#[test]
fn mean_excludes_infinite_psnr() {
    let r = |p| MetricsRecord { rmse_dbm: 1.0, mae_dbm: 0.5, ssim: 0.9, psnr_db: p };
    let (m, inf) = mean_record(&[r(20.0), r(f64::INFINITY), r(30.0)]);
    assert_eq!(inf, 1);
    assert_eq!(m.psnr_db, 25.0);
    assert_eq!(m.rmse_dbm, 1.0);
}
