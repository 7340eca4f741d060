use approx::assert_abs_diff_eq;
use fptc_core::features::*;
use fptc_core::grid::GridSpec;
use fptc_core::scene::TransmitterConfig;
use fptc_core::*;
use proptest::prelude::*;

#[test]
fn spot_value() {
    assert_abs_diff_eq!(cost231_pathloss(2000.0, 30.0, 1.5, 1.0).unwrap(), 140.792, epsilon = 1e-3);
}

#[test]
fn distance_doubling_slope() {
    let a = cost231_pathloss(2000.0, 30.0, 1.5, 1.0).unwrap();
    let b = cost231_pathloss(2000.0, 30.0, 1.5, 2.0).unwrap();
    assert_abs_diff_eq!(b - a, 10.6037, epsilon = 1e-3);
}

#[test]
fn mobile_correction_near_zero_at_one_and_a_half_meters() {
    // At 1 km the distance term vanishes and only a(h_r) depends on the receiver.
    let without_a = 46.3 + 33.9 * 2000f64.log10() - 13.82 * 30f64.log10() + 3.0;
    let pl = cost231_pathloss(2000.0, 30.0, 1.5, 1.0).unwrap();
    assert_abs_diff_eq!(without_a - pl, -0.00092, epsilon = 1e-4);
}

#[test]
fn non_positive_arguments_are_domain_errors() {
    assert!(matches!(cost231_pathloss(2000.0, 30.0, 1.5, 0.0), Err(Error::Domain(_))));
    assert!(matches!(cost231_pathloss(-1.0, 30.0, 1.5, 1.0), Err(Error::Domain(_))));
    assert!(matches!(cost231_pathloss(2000.0, 0.0, 1.5, 1.0), Err(Error::Domain(_))));
    assert!(matches!(cost231_pathloss(2000.0, 30.0, -1.5, 1.0), Err(Error::Domain(_))));
}

fn line_scene(side: usize, cell: f64, power: f64) -> Scene<f64> {
    let grid = GridSpec::new(side, 1, cell).unwrap();
    let tx = TransmitterConfig { x_px: 0, y_px: 0, h_b_m: 30.0, power_dbm: power, freq_mhz: 2000.0 };
    Scene::new(grid, Grid2::filled(side, 1, 0.0), tx, 1.5, None).unwrap()
}

#[test]
fn empirical_values_at_100_m_and_1_km() {
    let s = line_scene(11, 100.0, 46.0);
    let m = empirical_rsrp_dbm(&s);
    assert_abs_diff_eq!(m.get(1, 0), -59.567, epsilon = 1e-2);
    assert_abs_diff_eq!(m.get(10, 0), -94.792, epsilon = 1e-2);
}

#[test]
fn transmitter_pixel_is_clamped_maximum() {
    let s = line_scene(11, 10.0, 46.0);
    let m = empirical_rsrp_dbm(&s);
    let own = m.get(0, 0);
    assert!(own.is_finite());
    assert_eq!(own, m.max_value());
    let clamped = 46.0 - cost231_pathloss(2000.0, 30.0, 1.5, 0.005).unwrap();
    assert_abs_diff_eq!(own, clamped, epsilon = 1e-12);
}

proptest! {
    #[test]
    fn radially_non_increasing(
        tx_x in 0usize..24, tx_y in 0usize..24, dir in 0usize..8,
        h_b in 2.0f64..80.0, f in 800.0f64..2500.0, cell in 0.5f64..20.0,
    ) {
        let grid = GridSpec::new(24, 24, cell).unwrap();
        let tx = TransmitterConfig { x_px: tx_x, y_px: tx_y, h_b_m: h_b, power_dbm: 30.0, freq_mhz: f };
        let scene = Scene::new(grid, Grid2::filled(24, 24, 0.0), tx, 1.5, None).unwrap();
        let m = empirical_rsrp_dbm(&scene);
        let (dx, dy) = [(1i64, 0i64), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)][dir];
        let (mut x, mut y) = (tx_x as i64, tx_y as i64);
        let mut prev = m.get(tx_x, tx_y);
        loop {
            x += dx;
            y += dy;
            if !grid.contains(x, y) { break; }
            let v = m.get(x as usize, y as usize);
            prop_assert!(v <= prev);
            prev = v;
        }
    }
}
