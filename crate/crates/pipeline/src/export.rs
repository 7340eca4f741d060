//! Radio-map exports: 8-bit grayscale PNG and raw dBm CSV.

use std::path::{Path, PathBuf};

use fptc_core::io::write_raster;
use fptc_core::{NormalizationRange, RadioMap};
use image::GrayImage;

use crate::error::{Error, Result};

/// Grayscale image of a map; pixel levels follow `range`.
pub fn map_image(map: &RadioMap<f64>, range: &NormalizationRange<f64>) -> GrayImage {
    let g = &map.values_dbm;
    GrayImage::from_fn(g.width() as u32, g.height() as u32, |x, y| {
        image::Luma([range.to_pixel(g.get(x as usize, y as usize)) as u8])
    })
}

/// Writes `{stem}.png` and `{stem}.csv`; returns both paths.
pub fn export_map(map: &RadioMap<f64>, range: &NormalizationRange<f64>, stem: &Path) -> Result<(PathBuf, PathBuf)> {
    if let Some(dir) = stem.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let png = stem.with_extension("png");
    let csv = stem.with_extension("csv");
    map_image(map, range).save(&png).map_err(|e| Error::report(&png, e))?;
    write_raster(&csv, &map.values_dbm)?;
    Ok((png, csv))
}
