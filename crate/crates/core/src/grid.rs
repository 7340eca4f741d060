//! Raster containers.
//!
//! Coordinate convention used throughout the crate: `x` is the column index,
//! `y` is the row index, the origin is the top-left cell, and storage is
//! row-major (`index = y * width + x`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

/// Pixel dimensions and physical resolution of an interest area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec<T> {
    pub width_px: usize,
    pub height_px: usize,
    /// Meters per pixel edge.
    pub cell_size_m: T,
}

impl<T: Real> GridSpec<T> {
    pub fn new(width_px: usize, height_px: usize, cell_size_m: T) -> Result<Self> {
        let spec = Self { width_px, height_px, cell_size_m };
        spec.validate()?;
        Ok(spec)
    }

    /// Square grid with the default 1 m resolution.
    pub fn square(side_px: usize) -> Result<Self> {
        Self::new(side_px, side_px, T::one())
    }

    pub fn validate(&self) -> Result<()> {
        if self.width_px == 0 || self.height_px == 0 {
            return Err(Error::validation(format!(
                "grid must be at least 1x1, got {}x{}",
                self.width_px, self.height_px
            )));
        }
        if !(self.cell_size_m > T::zero()) || !self.cell_size_m.is_finite() {
            return Err(Error::validation(format!("cell_size_m must be > 0, got {}", self.cell_size_m)));
        }
        Ok(())
    }

    /// Number of pixels, `N_p` in the metric definitions.
    pub fn len(&self) -> usize {
        self.width_px * self.height_px
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width_px && (y as usize) < self.height_px
    }

    pub fn same_shape(&self, other: &GridSpec<T>) -> bool {
        self.width_px == other.width_px && self.height_px == other.height_px
    }
}

/// Dense row-major 2-D raster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid2<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Copy> Grid2<T> {
    pub fn filled(width: usize, height: usize, value: T) -> Self {
        Self { width, height, data: vec![value; width * height] }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::validation(format!(
                "raster of {}x{} needs {} values, got {}",
                width,
                height,
                width * height,
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: T) {
        self.data[y * self.width + x] = v;
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn map<U: Copy>(&self, f: impl FnMut(T) -> U) -> Grid2<U> {
        Grid2 { width: self.width, height: self.height, data: self.data.iter().copied().map(f).collect() }
    }

    /// Copies the `w`x`h` window whose top-left corner is `(x0, y0)`.
    pub fn window(&self, x0: usize, y0: usize, w: usize, h: usize) -> Result<Self> {
        if x0 + w > self.width || y0 + h > self.height {
            return Err(Error::Range(format!(
                "window ({x0},{y0}) size {w}x{h} exceeds {}x{} raster",
                self.width, self.height
            )));
        }
        Ok(Self::from_fn(w, h, |x, y| self.get(x0 + x, y0 + y)))
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks(self.width)
    }
}

impl<T: Real> Grid2<T> {
    pub fn max_value(&self) -> T {
        self.data.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn min_value(&self) -> T {
        self.data.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}
