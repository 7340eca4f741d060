//! Scene, radio map and measurement data model.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid2, GridSpec};
use crate::real::Real;

/// The single transmitter kept inside an interest area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmitterConfig<T> {
    pub x_px: usize,
    pub y_px: usize,
    /// Height above ground in meters.
    pub h_b_m: T,
    pub power_dbm: T,
    pub freq_mhz: T,
}

impl<T: Real> TransmitterConfig<T> {
    pub fn validate(&self, grid: &GridSpec<T>) -> Result<()> {
        if self.x_px >= grid.width_px || self.y_px >= grid.height_px {
            return Err(Error::validation(format!(
                "transmitter ({}, {}) outside {}x{} grid",
                self.x_px, self.y_px, grid.width_px, grid.height_px
            )));
        }
        if !(self.h_b_m > T::zero()) {
            return Err(Error::validation(format!("transmitter height must be > 0, got {}", self.h_b_m)));
        }
        if !(self.freq_mhz > T::zero()) {
            return Err(Error::validation(format!("frequency must be > 0, got {}", self.freq_mhz)));
        }
        if !self.power_dbm.is_finite() {
            return Err(Error::validation("transmit power must be finite"));
        }
        Ok(())
    }

    pub fn position(&self) -> (usize, usize) {
        (self.x_px, self.y_px)
    }
}

/// RSRP raster in dBm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadioMap<T> {
    pub grid: GridSpec<T>,
    pub values_dbm: Grid2<T>,
}

impl<T: Real> RadioMap<T> {
    pub fn new(grid: GridSpec<T>, values_dbm: Grid2<T>) -> Result<Self> {
        let map = Self { grid, values_dbm };
        map.validate()?;
        Ok(map)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.values_dbm.shape() != (self.grid.width_px, self.grid.height_px) {
            return Err(Error::validation(format!(
                "radio map raster {:?} does not match grid {}x{}",
                self.values_dbm.shape(),
                self.grid.width_px,
                self.grid.height_px
            )));
        }
        if !self.values_dbm.all_finite() {
            return Err(Error::validation("radio map contains non-finite values"));
        }
        Ok(())
    }

    pub fn get(&self, x: usize, y: usize) -> T {
        self.values_dbm.get(x, y)
    }
}

/// One on-site RSRP sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measurement<T> {
    pub x_px: usize,
    pub y_px: usize,
    pub rsrp_dbm: T,
}

/// Sparse measurements over an interest area.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MeasurementSet<T> {
    pub samples: Vec<Measurement<T>>,
}

impl<T: Real> MeasurementSet<T> {
    pub fn new(samples: Vec<Measurement<T>>) -> Self {
        Self { samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Measurement<T>> {
        self.samples.iter()
    }

    /// Checks bounds and distinctness against `grid`.
    pub fn validate(&self, grid: &GridSpec<T>) -> Result<()> {
        let mut seen = HashSet::with_capacity(self.samples.len());
        for s in &self.samples {
            if s.x_px >= grid.width_px || s.y_px >= grid.height_px {
                return Err(Error::validation(format!(
                    "measurement ({}, {}) outside {}x{} grid",
                    s.x_px, s.y_px, grid.width_px, grid.height_px
                )));
            }
            if !s.rsrp_dbm.is_finite() {
                return Err(Error::validation(format!("measurement ({}, {}) is not finite", s.x_px, s.y_px)));
            }
            if !seen.insert((s.x_px, s.y_px)) {
                return Err(Error::validation(format!("duplicate measurement position ({}, {})", s.x_px, s.y_px)));
            }
        }
        Ok(())
    }

    /// Additionally requires every sample to sit on an obstacle-free cell.
    pub fn validate_on(&self, scene: &Scene<T>) -> Result<()> {
        self.validate(&scene.grid)?;
        for s in &self.samples {
            if scene.heights.get(s.x_px, s.y_px) > T::zero() {
                return Err(Error::validation(format!(
                    "measurement ({}, {}) lies on an obstacle footprint",
                    s.x_px, s.y_px
                )));
            }
        }
        Ok(())
    }
}

/// Rasterized interest area: obstacle heights, one transmitter, optional ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene<T> {
    pub grid: GridSpec<T>,
    /// Obstacle height in meters; 0 marks free space.
    pub heights: Grid2<T>,
    pub tx: TransmitterConfig<T>,
    /// Receiver height `h_r` in meters.
    pub rx_height_m: T,
    pub ground_truth: Option<RadioMap<T>>,
}

impl<T: Real> Scene<T> {
    pub fn new(
        grid: GridSpec<T>,
        heights: Grid2<T>,
        tx: TransmitterConfig<T>,
        rx_height_m: T,
        ground_truth: Option<RadioMap<T>>,
    ) -> Result<Self> {
        let scene = Self { grid, heights, tx, rx_height_m, ground_truth };
        scene.validate()?;
        Ok(scene)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.heights.shape() != (self.grid.width_px, self.grid.height_px) {
            return Err(Error::validation(format!(
                "height raster {:?} does not match grid {}x{}",
                self.heights.shape(),
                self.grid.width_px,
                self.grid.height_px
            )));
        }
        if self.heights.as_slice().iter().any(|h| !(*h >= T::zero()) || !h.is_finite()) {
            return Err(Error::validation("obstacle heights must be finite and >= 0"));
        }
        self.tx.validate(&self.grid)?;
        if !(self.rx_height_m > T::zero()) {
            return Err(Error::validation(format!("receiver height must be > 0, got {}", self.rx_height_m)));
        }
        if !(self.rx_height_m < self.tx.h_b_m) {
            return Err(Error::validation(format!(
                "receiver height {} must be below transmitter height {}",
                self.rx_height_m, self.tx.h_b_m
            )));
        }
        if let Some(gt) = &self.ground_truth {
            gt.validate()?;
            if !gt.grid.same_shape(&self.grid) {
                return Err(Error::validation(format!(
                    "ground truth {}x{} does not match heights {}x{}",
                    gt.grid.width_px, gt.grid.height_px, self.grid.width_px, self.grid.height_px
                )));
            }
        }
        Ok(())
    }

    pub fn is_free(&self, x: usize, y: usize) -> bool {
        self.heights.get(x, y) <= T::zero()
    }

    pub fn free_cell_count(&self) -> usize {
        self.heights.as_slice().iter().filter(|h| **h <= T::zero()).count()
    }

    pub fn ground_truth(&self) -> Result<&RadioMap<T>> {
        self.ground_truth.as_ref().ok_or_else(|| Error::validation("scene has no ground truth"))
    }

    /// Cuts a `size`x`size` interest area at `origin = (x0, y0)`.
    ///
    /// All rasters are cropped consistently and the transmitter is
    /// re-expressed relative to the new origin.
    pub fn crop(&self, origin: (usize, usize), size: usize) -> Result<Self> {
        let (x0, y0) = origin;
        if size == 0 {
            return Err(Error::validation("crop size must be positive"));
        }
        if x0 + size > self.grid.width_px || y0 + size > self.grid.height_px {
            return Err(Error::Range(format!(
                "crop window at ({x0},{y0}) of size {size} exceeds {}x{} source",
                self.grid.width_px, self.grid.height_px
            )));
        }
        let (tx_x, tx_y) = self.tx.position();
        if tx_x < x0 || tx_y < y0 || tx_x >= x0 + size || tx_y >= y0 + size {
            return Err(Error::validation(format!(
                "transmitter ({tx_x}, {tx_y}) outside crop window at ({x0},{y0}) of size {size}"
            )));
        }
        let grid = GridSpec { width_px: size, height_px: size, cell_size_m: self.grid.cell_size_m };
        let heights = self.heights.window(x0, y0, size, size)?;
        let ground_truth = match &self.ground_truth {
            Some(gt) => Some(RadioMap::new(grid, gt.values_dbm.window(x0, y0, size, size)?)?),
            None => None,
        };
        let tx = TransmitterConfig { x_px: tx_x - x0, y_px: tx_y - y0, ..self.tx };
        Scene::new(grid, heights, tx, self.rx_height_m, ground_truth)
    }
}
