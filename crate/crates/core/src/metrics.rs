//! Radio-map quality metrics.
//!
//! RMSE and MAE are computed in dBm over every pixel. SSIM and PSNR treat the
//! maps as 8-bit images, converted through a shared [`NormalizationRange`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normalize::NormalizationRange;
use crate::real::Real;
use crate::scene::RadioMap;

/// Side length of the SSIM window.
pub const SSIM_WINDOW: usize = 11;
/// Standard deviation of the SSIM Gaussian window, pixels.
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;
/// Dynamic range of 8-bit pixels.
pub const PIXEL_MAX: f64 = 255.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub rmse_dbm: f64,
    pub mae_dbm: f64,
    pub ssim: f64,
    /// `+inf` for identical maps.
    pub psnr_db: f64,
}

fn check_shapes<T: Real>(p: &RadioMap<T>, q: &RadioMap<T>) -> Result<()> {
    if p.values_dbm.shape() != q.values_dbm.shape() {
        return Err(Error::validation(format!(
            "metric inputs differ in shape: {:?} vs {:?}",
            p.values_dbm.shape(),
            q.values_dbm.shape()
        )));
    }
    Ok(())
}

fn residuals<'a, T: Real>(p: &'a RadioMap<T>, q: &'a RadioMap<T>) -> impl Iterator<Item = f64> + 'a {
    p.values_dbm.as_slice().iter().zip(q.values_dbm.as_slice()).map(|(a, b)| a.as_f64() - b.as_f64())
}

pub fn rmse<T: Real>(p: &RadioMap<T>, q: &RadioMap<T>) -> Result<f64> {
    check_shapes(p, q)?;
    let n = p.grid.len() as f64;
    Ok((residuals(p, q).map(|r| r * r).sum::<f64>() / n).sqrt())
}

pub fn mae<T: Real>(p: &RadioMap<T>, q: &RadioMap<T>) -> Result<f64> {
    check_shapes(p, q)?;
    let n = p.grid.len() as f64;
    Ok(residuals(p, q).map(f64::abs).sum::<f64>() / n)
}

fn to_pixels<T: Real>(m: &RadioMap<T>, range: &NormalizationRange<T>) -> Vec<f64> {
    m.values_dbm.as_slice().iter().map(|v| range.to_pixel(*v).as_f64()).collect()
}

fn gaussian_window() -> Vec<f64> {
    let r = (SSIM_WINDOW / 2) as i64;
    let mut w = Vec::with_capacity(SSIM_WINDOW * SSIM_WINDOW);
    for dy in -r..=r {
        for dx in -r..=r {
            w.push((-((dx * dx + dy * dy) as f64) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp());
        }
    }
    let sum: f64 = w.iter().sum();
    w.into_iter().map(|v| v / sum).collect()
}

/// SSIM of two pixel-scale images, mean over fully interior windows.
pub fn ssim_pixels(a: &[f64], b: &[f64], width: usize, height: usize) -> Result<f64> {
    if width < SSIM_WINDOW || height < SSIM_WINDOW {
        return Err(Error::validation(format!(
            "SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW} pixels, got {width}x{height}"
        )));
    }
    let c1 = (SSIM_K1 * PIXEL_MAX).powi(2);
    let c2 = (SSIM_K2 * PIXEL_MAX).powi(2);
    let window = gaussian_window();
    let mut total = 0.0;
    let mut count = 0usize;
    for y0 in 0..=height - SSIM_WINDOW {
        for x0 in 0..=width - SSIM_WINDOW {
            let (mut ma, mut mb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for wy in 0..SSIM_WINDOW {
                let row = (y0 + wy) * width + x0;
                for wx in 0..SSIM_WINDOW {
                    let w = window[wy * SSIM_WINDOW + wx];
                    let (va, vb) = (a[row + wx], b[row + wx]);
                    ma += w * va;
                    mb += w * vb;
                    saa += w * va * va;
                    sbb += w * vb * vb;
                    sab += w * va * vb;
                }
            }
            let var_a = saa - ma * ma;
            let var_b = sbb - mb * mb;
            let cov = sab - ma * mb;
            total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
            count += 1;
        }
    }
    Ok(total / count as f64)
}

pub fn ssim<T: Real>(p: &RadioMap<T>, q: &RadioMap<T>, range: &NormalizationRange<T>) -> Result<f64> {
    check_shapes(p, q)?;
    range.validate()?;
    ssim_pixels(&to_pixels(p, range), &to_pixels(q, range), p.grid.width_px, p.grid.height_px)
}

/// PSNR of two pixel-scale images; `+inf` when they are identical.
pub fn psnr_pixels(a: &[f64], b: &[f64]) -> f64 {
    let sse: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    if sse == 0.0 {
        return f64::INFINITY;
    }
    10.0 * (a.len() as f64 * PIXEL_MAX * PIXEL_MAX / sse).log10()
}

pub fn psnr<T: Real>(p: &RadioMap<T>, q: &RadioMap<T>, range: &NormalizationRange<T>) -> Result<f64> {
    check_shapes(p, q)?;
    range.validate()?;
    Ok(psnr_pixels(&to_pixels(p, range), &to_pixels(q, range)))
}

/// All four metrics of `generated` against `truth`.
pub fn evaluate_maps<T: Real>(
    truth: &RadioMap<T>,
    generated: &RadioMap<T>,
    range: &NormalizationRange<T>,
) -> Result<MetricsRecord> {
    Ok(MetricsRecord {
        rmse_dbm: rmse(truth, generated)?,
        mae_dbm: mae(truth, generated)?,
        ssim: ssim(truth, generated, range)?,
        psnr_db: psnr(truth, generated, range)?,
    })
}

/// Mean of a set of records. PSNR averages only finite entries; the number of
/// infinite ones is returned alongside.
pub fn mean_record(records: &[MetricsRecord]) -> (MetricsRecord, usize) {
    let n = records.len().max(1) as f64;
    let finite: Vec<f64> = records.iter().map(|r| r.psnr_db).filter(|v| v.is_finite()).collect();
    let infinite = records.len() - finite.len();
    let psnr = if finite.is_empty() {
        if records.is_empty() {
            f64::NAN
        } else {
            f64::INFINITY
        }
    } else {
        finite.iter().sum::<f64>() / finite.len() as f64
    };
    (
        MetricsRecord {
            rmse_dbm: records.iter().map(|r| r.rmse_dbm).sum::<f64>() / n,
            mae_dbm: records.iter().map(|r| r.mae_dbm).sum::<f64>() / n,
            ssim: records.iter().map(|r| r.ssim).sum::<f64>() / n,
            psnr_db: psnr,
        },
        infinite,
    )
}
