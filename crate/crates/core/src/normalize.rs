use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid2;
use crate::real::Real;

/// dBm interval mapped onto `[0, 1]` network channels and 8-bit pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationRange<T> {
    pub rsrp_min_dbm: T,
    pub rsrp_max_dbm: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

impl<T: Real> Default for NormalizationRange<T> {
    fn default() -> Self {
        Self { rsrp_min_dbm: T::lit(-150.0), rsrp_max_dbm: T::lit(-40.0) }
    }
}

impl<T: Real> NormalizationRange<T> {
    pub fn new(rsrp_min_dbm: T, rsrp_max_dbm: T) -> Result<Self> {
        let r = Self { rsrp_min_dbm, rsrp_max_dbm };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rsrp_min_dbm < self.rsrp_max_dbm) || !self.rsrp_min_dbm.is_finite() || !self.rsrp_max_dbm.is_finite()
        {
            return Err(Error::validation(format!(
                "degenerate normalization range [{}, {}]",
                self.rsrp_min_dbm, self.rsrp_max_dbm
            )));
        }
        Ok(())
    }

    pub fn span(&self) -> T {
        self.rsrp_max_dbm - self.rsrp_min_dbm
    }

    /// Clamps to the range, then maps linearly onto `[0, 1]`.
    #[inline]
    pub fn forward(&self, dbm: T) -> T {
        let v = dbm.max(self.rsrp_min_dbm).min(self.rsrp_max_dbm);
        (v - self.rsrp_min_dbm) / self.span()
    }

    #[inline]
    pub fn inverse(&self, unit: T) -> T {
        self.rsrp_min_dbm + unit * self.span()
    }

    /// 8-bit pixel level on `[0, 255]`, rounded to the nearest integer.
    #[inline]
    pub fn to_pixel(&self, dbm: T) -> T {
        (self.forward(dbm) * T::lit(255.0)).round()
    }
}

/// Applies the range to every cell of a raster.
pub fn normalize_rsrp<T: Real>(
    values: &Grid2<T>,
    range: &NormalizationRange<T>,
    direction: Direction,
) -> Result<Grid2<T>> {
    range.validate()?;
    match direction {
        Direction::Forward => {
            if !values.all_finite() {
                return Err(Error::validation("forward normalization needs finite dBm values"));
            }
            Ok(values.map(|v| range.forward(v)))
        }
        Direction::Inverse => {
            if values.as_slice().iter().any(|v| !(*v >= T::zero() && *v <= T::one())) {
                return Err(Error::validation("inverse normalization needs values in [0, 1]"));
            }
            Ok(values.map(|v| range.inverse(v)))
        }
    }
}
