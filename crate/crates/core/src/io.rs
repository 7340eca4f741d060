//! Per-scene directory format.
//!
//! ```text
//! <scene>/heights.csv        H rows x W comma-separated reals (meters)
//! <scene>/ground_truth.csv   optional, same shape, RSRP in dBm
//! <scene>/meta.json          tx_x, tx_y, tx_height_m, tx_power_dbm, freq_mhz,
//!                            rx_height_m, cell_size_m
//! ```

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid2, GridSpec};
use crate::real::Real;
use crate::scene::{RadioMap, Scene, TransmitterConfig};

pub const HEIGHTS_FILE: &str = "heights.csv";
pub const GROUND_TRUTH_FILE: &str = "ground_truth.csv";
pub const META_FILE: &str = "meta.json";

fn default_cell_size() -> f64 {
    1.0
}

/// Contents of `meta.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneMeta {
    pub tx_x: usize,
    pub tx_y: usize,
    pub tx_height_m: f64,
    pub tx_power_dbm: f64,
    pub freq_mhz: f64,
    pub rx_height_m: f64,
    #[serde(default = "default_cell_size")]
    pub cell_size_m: f64,
}

fn ingest_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Ingest { path: path.to_path_buf(), reason: reason.into() }
}

/// Reads a headerless CSV raster.
pub fn read_raster<T: Real>(path: &Path) -> Result<Grid2<T>> {
    if !path.is_file() {
        return Err(ingest_err(path, "missing file"));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| ingest_err(path, e.to_string()))?;
    let mut width = None;
    let mut data = Vec::new();
    let mut rows = 0;
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| ingest_err(path, e.to_string()))?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(ingest_err(path, format!("row {row} has {} columns, expected {w}", record.len())))
            }
            _ => {}
        }
        for (col, field) in record.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| ingest_err(path, format!("row {row} column {col}: cannot parse {field:?}")))?;
            data.push(T::from_f64(v).ok_or_else(|| ingest_err(path, format!("value {v} not representable")))?);
        }
        rows += 1;
    }
    let width = width.ok_or_else(|| ingest_err(path, "empty raster"))?;
    Grid2::from_vec(width, rows, data)
}

pub fn write_raster<T: Real>(path: &Path, grid: &Grid2<T>) -> Result<()> {
    let mut out = String::with_capacity(grid.as_slice().len() * 8);
    for row in grid.rows() {
        let line: Vec<String> = row.iter().map(|v| format!("{}", v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Loads and validates one scene directory.
pub fn load_scene<T: Real>(dir: &Path) -> Result<Scene<T>> {
    let meta_path = dir.join(META_FILE);
    if !meta_path.is_file() {
        return Err(ingest_err(&meta_path, "missing file"));
    }
    let text = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let meta: SceneMeta = serde_json::from_str(&text).map_err(|e| ingest_err(&meta_path, e.to_string()))?;
    let heights = read_raster::<T>(&dir.join(HEIGHTS_FILE))?;

    let grid = GridSpec::new(heights.width(), heights.height(), T::lit(meta.cell_size_m))?;
    let gt_path = dir.join(GROUND_TRUTH_FILE);
    let ground_truth = if gt_path.exists() {
        let values = read_raster::<T>(&gt_path)?;
        if values.shape() != heights.shape() {
            return Err(Error::validation(format!(
                "{} is {}x{} but {} is {}x{}",
                gt_path.display(),
                values.width(),
                values.height(),
                HEIGHTS_FILE,
                heights.width(),
                heights.height()
            )));
        }
        Some(RadioMap::new(grid, values)?)
    } else {
        None
    };
    let tx = TransmitterConfig {
        x_px: meta.tx_x,
        y_px: meta.tx_y,
        h_b_m: T::lit(meta.tx_height_m),
        power_dbm: T::lit(meta.tx_power_dbm),
        freq_mhz: T::lit(meta.freq_mhz),
    };
    Scene::new(grid, heights, tx, T::lit(meta.rx_height_m), ground_truth)
}

pub fn scene_meta<T: Real>(scene: &Scene<T>) -> SceneMeta {
    SceneMeta {
        tx_x: scene.tx.x_px,
        tx_y: scene.tx.y_px,
        tx_height_m: scene.tx.h_b_m.as_f64(),
        tx_power_dbm: scene.tx.power_dbm.as_f64(),
        freq_mhz: scene.tx.freq_mhz.as_f64(),
        rx_height_m: scene.rx_height_m.as_f64(),
        cell_size_m: scene.grid.cell_size_m.as_f64(),
    }
}

/// Writes `scene` in the directory format, creating `dir` if needed.
pub fn save_scene<T: Real>(scene: &Scene<T>, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_raster(&dir.join(HEIGHTS_FILE), &scene.heights)?;
    if let Some(gt) = &scene.ground_truth {
        write_raster(&dir.join(GROUND_TRUTH_FILE), &gt.values_dbm)?;
    }
    let meta_path = dir.join(META_FILE);
    let json = serde_json::to_string_pretty(&scene_meta(scene)).expect("meta serializes");
    let mut f = fs::File::create(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    f.write_all(json.as_bytes()).and_then(|_| f.write_all(b"\n")).map_err(|e| Error::io(&meta_path, e))
}

/// Scene subdirectories of `root` (those containing `meta.json`), sorted by name.
pub fn list_scene_dirs(root: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(root).map_err(|e| Error::io(root, e))?;
    let mut dirs = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(root, e))?;
        let path = entry.path();
        if path.is_dir() && path.join(META_FILE).is_file() {
            dirs.push(path);
        }
    }
    dirs.sort();
    Ok(dirs)
}
