use fptc_core::features::*;
use fptc_core::grid::GridSpec;
use fptc_core::scene::TransmitterConfig;
use fptc_core::*;

fn scene_with(heights: Grid2<f64>, tx: (usize, usize)) -> Scene<f64> {
    let grid = GridSpec::new(heights.width(), heights.height(), 1.0).unwrap();
    let tx = TransmitterConfig { x_px: tx.0, y_px: tx.1, h_b_m: 30.0, power_dbm: 46.0, freq_mhz: 2000.0 };
    Scene::new(grid, heights, tx, 1.5, None).unwrap()
}

#[test]
fn one_hot_at_transmitter() {
    let s = scene_with(Grid2::filled(16, 16, 0.0), (5, 7));
    let m = transmitter_position_map(&s);
    assert_eq!(m.values.get(5, 7), 1.0);
    assert_eq!(m.values.as_slice().iter().sum::<f64>(), 1.0);
    assert_eq!(m, transmitter_position_map(&s));
    m.validate().unwrap();
}

#[test]
fn empty_scene_top_view_is_zero() {
    let s = scene_with(Grid2::filled(8, 8, 0.0), (0, 0));
    assert!(obstacle_topview_map(&s).values.as_slice().iter().all(|v| *v == 0.0));
}

#[test]
fn single_building_normalizes_to_one() {
    let h = Grid2::from_fn(8, 8, |x, y| if (2..4).contains(&x) && (3..6).contains(&y) { 30.0 } else { 0.0 });
    let m = obstacle_topview_map(&scene_with(h, (0, 0)));
    assert_eq!(m.values.get(2, 3), 1.0);
    assert_eq!(m.values.get(0, 0), 0.0);
}

#[test]
fn heights_divided_by_max() {
    let h = Grid2::from_fn(4, 4, |x, _| match x {
        1 => 10.0,
        2 => 20.0,
        _ => 0.0,
    });
    let m = obstacle_topview_map(&scene_with(h, (0, 0)));
    assert_eq!(m.values.get(1, 0), 0.5);
    assert_eq!(m.values.get(2, 0), 1.0);
}
