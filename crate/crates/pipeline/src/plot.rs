//! Line plots rendered to PNG and SVG.
//!
//! PNG output goes through [`RasterBackend`], a small pixel backend over an
//! RGB image. It does not rasterize text, so axis labels and captions appear
//! only in the SVG rendering of the same figure.

use std::convert::Infallible;
use std::path::Path;

use image::{Rgb, RgbImage};
use plotters::coord::Shift;
use plotters::prelude::*;
use plotters_backend::{BackendColor, BackendCoord, BackendTextStyle, DrawingErrorKind};

use crate::error::{Error, Result};

/// Pixel backend over an RGB image; text is not drawn.
pub struct RasterBackend<'a> {
    image: &'a mut RgbImage,
}

impl<'a> RasterBackend<'a> {
    pub fn new(image: &'a mut RgbImage) -> Self {
        Self { image }
    }
}

impl DrawingBackend for RasterBackend<'_> {
    type ErrorType = Infallible;

    fn get_size(&self) -> (u32, u32) {
        self.image.dimensions()
    }

    fn ensure_prepared(&mut self) -> std::result::Result<(), DrawingErrorKind<Infallible>> {
        Ok(())
    }

    fn present(&mut self) -> std::result::Result<(), DrawingErrorKind<Infallible>> {
        Ok(())
    }

    fn draw_pixel(
        &mut self,
        (x, y): BackendCoord,
        color: BackendColor,
    ) -> std::result::Result<(), DrawingErrorKind<Infallible>> {
        let (w, h) = self.image.dimensions();
        if x < 0 || y < 0 || x as u32 >= w || y as u32 >= h || color.alpha <= 0.0 {
            return Ok(());
        }
        let a = color.alpha.min(1.0);
        let px = self.image.get_pixel_mut(x as u32, y as u32);
        let (r, g, b) = color.rgb;
        for (dst, src) in px.0.iter_mut().zip([r, g, b]) {
            *dst = (f64::from(src) * a + f64::from(*dst) * (1.0 - a)).round() as u8;
        }
        Ok(())
    }

    fn draw_text<S: BackendTextStyle>(
        &mut self,
        _text: &str,
        _style: &S,
        _pos: BackendCoord,
    ) -> std::result::Result<(), DrawingErrorKind<Infallible>> {
        Ok(())
    }
}

/// One panel: y-axis label and `(x, y)` points in drawing order.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn bounds(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let finite = values.filter(|v| v.is_finite());
    let lo = finite.clone().fold(f64::INFINITY, f64::min);
    let hi = finite.fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = ((hi - lo) * 0.1).max(1e-3);
    (lo - pad, hi + pad)
}

fn draw_panels<DB: DrawingBackend>(
    root: &DrawingArea<DB, Shift>,
    title: &str,
    x_label: &str,
    panels: &[Panel],
) -> std::result::Result<(), String> {
    root.fill(&WHITE).map_err(|e| e.to_string())?;
    let root = root.titled(title, ("sans-serif", 20)).map_err(|e| e.to_string())?;
    let cols = panels.len().min(2).max(1);
    let rows = panels.len().div_ceil(cols).max(1);
    for (area, panel) in root.split_evenly((rows, cols)).iter().zip(panels) {
        let (x0, x1) = bounds(panel.points.iter().map(|p| p.0));
        let (y0, y1) = bounds(panel.points.iter().map(|p| p.1));
        let mut chart = ChartBuilder::on(area)
            .margin(12)
            .x_label_area_size(32)
            .y_label_area_size(48)
            .build_cartesian_2d(x0..x1, y0..y1)
            .map_err(|e| e.to_string())?;
        chart.configure_mesh().x_desc(x_label).y_desc(panel.label.as_str()).draw().map_err(|e| e.to_string())?;
        let pts: Vec<(f64, f64)> = panel.points.iter().copied().filter(|p| p.1.is_finite()).collect();
        chart.draw_series(LineSeries::new(pts.clone(), BLUE.stroke_width(2))).map_err(|e| e.to_string())?;
        chart.draw_series(pts.iter().map(|p| Circle::new(*p, 4, BLUE.filled()))).map_err(|e| e.to_string())?;
    }
    root.present().map_err(|e| e.to_string())
}

pub const PLOT_SIZE: (u32, u32) = (960, 720);

/// Renders `panels` to `{stem}.png` and `{stem}.svg`.
pub fn write_line_plot(stem: &Path, title: &str, x_label: &str, panels: &[Panel]) -> Result<()> {
    let png = stem.with_extension("png");
    let svg = stem.with_extension("svg");
    if let Some(dir) = stem.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut image = RgbImage::from_pixel(PLOT_SIZE.0, PLOT_SIZE.1, Rgb([255, 255, 255]));
    {
        let root = RasterBackend::new(&mut image).into_drawing_area();
        draw_panels(&root, title, x_label, panels).map_err(|e| Error::report(&png, e))?;
    }
    image.save(&png).map_err(|e| Error::report(&png, e.to_string()))?;
    let root = SVGBackend::new(&svg, PLOT_SIZE).into_drawing_area();
    draw_panels(&root, title, x_label, panels).map_err(|e| Error::report(&svg, e))
}
