use std::fs;
use std::path::Path;

use fptc_core::io::*;
use fptc_core::*;

fn write_scene_files(dir: &Path, w: usize, h: usize, gt: Option<(usize, usize)>) {
    let heights = Grid2::from_fn(w, h, |x, y| if (x + y) % 9 == 0 { 12.5 } else { 0.0 });
    write_raster(&dir.join(HEIGHTS_FILE), &heights).unwrap();
    if let Some((gw, gh)) = gt {
        let values = Grid2::from_fn(gw, gh, |x, y| -70.0 - 0.25 * (x + y) as f64);
        write_raster(&dir.join(GROUND_TRUTH_FILE), &values).unwrap();
    }
    let meta = SceneMeta {
        tx_x: 3,
        tx_y: 4,
        tx_height_m: 30.0,
        tx_power_dbm: 46.0,
        freq_mhz: 2000.0,
        rx_height_m: 1.5,
        cell_size_m: 2.0,
    };
    fs::write(dir.join(META_FILE), serde_json::to_string(&meta).unwrap()).unwrap();
}

#[test]
fn loads_well_formed_directory() {
    let dir = tempfile::tempdir().unwrap();
    write_scene_files(dir.path(), 128, 128, Some((128, 128)));
    let scene: Scene<f64> = load_scene(dir.path()).unwrap();
    assert_eq!((scene.grid.width_px, scene.grid.height_px), (128, 128));
    assert_eq!(scene.tx.position(), (3, 4));
    assert_eq!(scene.grid.cell_size_m, 2.0);
    assert_eq!(scene.heights.get(0, 0), 12.5);
    assert_eq!(scene.ground_truth.unwrap().get(4, 0), -71.0);
}

#[test]
fn missing_heights_names_the_file() {
    let dir = tempfile::tempdir().unwrap();
    write_scene_files(dir.path(), 8, 8, None);
    fs::remove_file(dir.path().join(HEIGHTS_FILE)).unwrap();
    let err = load_scene::<f64>(dir.path()).unwrap_err();
    assert!(matches!(&err, Error::Ingest { path, .. } if path.ends_with(HEIGHTS_FILE)), "{err}");
}

#[test]
fn ground_truth_shape_mismatch_is_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    write_scene_files(dir.path(), 128, 128, Some((64, 64)));
    assert!(matches!(load_scene::<f64>(dir.path()), Err(Error::Validation(_))));
}

#[test]
fn transmitter_outside_grid_is_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    write_scene_files(dir.path(), 3, 3, None);
    assert!(matches!(load_scene::<f64>(dir.path()), Err(Error::Validation(_))));
}

#[test]
fn save_then_load_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    write_scene_files(dir.path(), 16, 12, Some((16, 12)));
    let scene: Scene<f64> = load_scene(dir.path()).unwrap();
    let out = dir.path().join("copy");
    save_scene(&scene, &out).unwrap();
    assert_eq!(load_scene::<f64>(&out).unwrap(), scene);
}
