use approx::assert_abs_diff_eq;
use fptc_core::features::*;
use fptc_core::scene::Measurement;
use fptc_core::*;

fn set(points: &[(usize, usize, f64)]) -> MeasurementSet<f64> {
    MeasurementSet::new(points.iter().map(|&(x, y, v)| Measurement { x_px: x, y_px: y, rsrp_dbm: v }).collect())
}

fn gaussian(eps: f64) -> RbfConfig<f64> {
    RbfConfig { kernel: RbfKernel::Gaussian, shape_epsilon: ShapeParam::Explicit(eps), ridge: 0.0 }
}

#[test]
fn single_sample_is_reproduced() {
    let grid = GridSpec::square(8).unwrap();
    let out = rbf_interpolate_dbm(&set(&[(2, 3, -80.0)]), &grid, &gaussian(0.3)).unwrap();
    assert_abs_diff_eq!(out.get(2, 3), -80.0, epsilon = 1e-12);
}

#[test]
fn single_kernel_decay() {
    let grid = GridSpec::square(8).unwrap();
    let eps = 0.3;
    let out = rbf_interpolate_dbm(&set(&[(2, 3, -80.0)]), &grid, &gaussian(eps)).unwrap();
    let r2: f64 = 3.0 * 3.0 + 4.0 * 4.0;
    assert_abs_diff_eq!(out.get(5, 7), -80.0 * (-(eps * eps) * r2).exp(), epsilon = 1e-12);
}

#[test]
fn symmetric_pair_midpoint() {
    let grid = GridSpec::square(8).unwrap();
    let v = -70.0;
    let out = rbf_interpolate_dbm(&set(&[(0, 0, v), (4, 0, v)]), &grid, &gaussian(0.5)).unwrap();
    assert_abs_diff_eq!(out.get(2, 0) / v, 0.72253, epsilon = 1e-4);
}

#[test]
fn multiquadric_reproduces_samples() {
    let grid = GridSpec::square(16).unwrap();
    let pts = set(&[(1, 1, -60.0), (9, 4, -75.0), (3, 12, -90.0), (14, 14, -101.0)]);
    let cfg = RbfConfig { kernel: RbfKernel::Multiquadric, shape_epsilon: ShapeParam::Auto, ridge: 0.0 };
    let out = rbf_interpolate_dbm(&pts, &grid, &cfg).unwrap();
    for s in pts.iter() {
        assert_abs_diff_eq!(out.get(s.x_px, s.y_px), s.rsrp_dbm, epsilon = 1e-6);
    }
}

#[test]
fn singular_system_reports_condition() {
    // Thin-plate kernel vanishes at r = 0, so one sample without ridge is singular.
    let grid = GridSpec::square(8).unwrap();
    let cfg = RbfConfig { kernel: RbfKernel::ThinPlate, shape_epsilon: ShapeParam::Auto, ridge: 0.0 };
    let err = rbf_interpolate_dbm(&set(&[(2, 2, -70.0)]), &grid, &cfg).unwrap_err();
    assert!(matches!(err, Error::Numerical { condition } if condition.is_infinite()), "{err}");
}

#[test]
fn empty_set_falls_back_to_background() {
    let grid = GridSpec::<f64>::square(8).unwrap();
    let m = rbf_interpolate(&MeasurementSet::default(), &grid, &RbfConfig::default(), &NormalizationRange::default())
        .unwrap();
    assert!(m.values.as_slice().iter().all(|v| *v == 0.0));
}

#[test]
fn invalid_config_rejected() {
    let cfg = RbfConfig { kernel: RbfKernel::Gaussian, shape_epsilon: ShapeParam::Explicit(0.0), ridge: 0.0 };
    assert!(cfg.validate().is_err());
    let cfg = RbfConfig { kernel: RbfKernel::Gaussian, shape_epsilon: ShapeParam::Auto, ridge: -1.0 };
    assert!(cfg.validate().is_err());
}
