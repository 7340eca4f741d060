//! Scattered-data interpolation of sparse measurements with radial basis functions.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid2, GridSpec};
use crate::normalize::NormalizationRange;
use crate::real::Real;
use crate::scene::MeasurementSet;

use super::{FeatureKind, FeatureMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RbfKernel {
    /// `exp(-(eps r)^2)`
    Gaussian,
    /// `sqrt(1 + (eps r)^2)`
    Multiquadric,
    /// `r^2 ln r`, shape-free
    ThinPlate,
}

impl RbfKernel {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" => Some(RbfKernel::Gaussian),
            "multiquadric" => Some(RbfKernel::Multiquadric),
            "thin_plate" | "thin-plate" | "tps" => Some(RbfKernel::ThinPlate),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RbfKernel::Gaussian => "gaussian",
            RbfKernel::Multiquadric => "multiquadric",
            RbfKernel::ThinPlate => "thin_plate",
        }
    }

    #[inline]
    fn eval(self, r: f64, eps: f64) -> f64 {
        match self {
            RbfKernel::Gaussian => (-(eps * r) * (eps * r)).exp(),
            RbfKernel::Multiquadric => (1.0 + (eps * r) * (eps * r)).sqrt(),
            RbfKernel::ThinPlate => {
                if r == 0.0 {
                    0.0
                } else {
                    r * r * r.ln()
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ShapeParam<T> {
    /// `1 / h`, with `h = sqrt(grid area / N)` the mean sample spacing.
    Auto,
    Explicit(T),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RbfConfig<T> {
    pub kernel: RbfKernel,
    pub shape_epsilon: ShapeParam<T>,
    /// Diagonal regularizer added to the kernel matrix.
    pub ridge: T,
}

impl<T: Real> Default for RbfConfig<T> {
    fn default() -> Self {
        Self { kernel: RbfKernel::Gaussian, shape_epsilon: ShapeParam::Auto, ridge: T::lit(1e-8) }
    }
}

impl<T: Real> RbfConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if let ShapeParam::Explicit(eps) = self.shape_epsilon {
            if !(eps > T::zero()) {
                return Err(Error::validation(format!("rbf shape epsilon must be > 0, got {eps}")));
            }
        }
        if !(self.ridge >= T::zero()) {
            return Err(Error::validation(format!("rbf ridge must be >= 0, got {}", self.ridge)));
        }
        Ok(())
    }

    fn epsilon(&self, grid: &GridSpec<T>, n: usize) -> f64 {
        match self.shape_epsilon {
            ShapeParam::Explicit(e) => e.as_f64(),
            ShapeParam::Auto => {
                let spacing = (grid.len() as f64 / n as f64).sqrt();
                1.0 / spacing
            }
        }
    }
}

/// 2-norm condition estimate from the singular values.
fn condition_estimate(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Interpolated RSRP in dBm for every pixel.
///
/// The weights solve `(Phi + ridge I) w = v` over the sample sites; each
/// pixel is then `sum_j phi(|p - p_j|) w_j`. Computation runs in `f64`.
pub fn rbf_interpolate_dbm<T: Real>(m: &MeasurementSet<T>, grid: &GridSpec<T>, cfg: &RbfConfig<T>) -> Result<Grid2<T>> {
    cfg.validate()?;
    m.validate(grid)?;
    let n = m.len();
    if n == 0 {
        return Err(Error::validation("rbf interpolation needs at least one sample"));
    }
    let eps = cfg.epsilon(grid, n);
    let pts: Vec<(f64, f64)> = m.iter().map(|s| (s.x_px as f64, s.y_px as f64)).collect();
    let values = DVector::from_iterator(n, m.iter().map(|s| s.rsrp_dbm.as_f64()));
    let ridge = cfg.ridge.as_f64();
    let phi = DMatrix::from_fn(n, n, |j, k| {
        let r = ((pts[j].0 - pts[k].0).powi(2) + (pts[j].1 - pts[k].1).powi(2)).sqrt();
        cfg.kernel.eval(r, eps) + if j == k { ridge } else { 0.0 }
    });
    let weights = phi
        .clone()
        .lu()
        .solve(&values)
        .filter(|w| w.iter().all(|v| v.is_finite()))
        .ok_or_else(|| Error::Numerical { condition: condition_estimate(&phi) })?;

    let mut out = Grid2::filled(grid.width_px, grid.height_px, T::zero());
    for y in 0..grid.height_px {
        for x in 0..grid.width_px {
            let (fx, fy) = (x as f64, y as f64);
            let v: f64 = pts
                .iter()
                .zip(weights.iter())
                .map(|(p, w)| cfg.kernel.eval(((p.0 - fx).powi(2) + (p.1 - fy).powi(2)).sqrt(), eps) * w)
                .sum();
            out.set(x, y, T::lit(v));
        }
    }
    Ok(out)
}

/// Interpolated measurements normalized into `[0, 1]`.
///
/// An empty measurement set yields an all-background map.
pub fn rbf_interpolate<T: Real>(
    m: &MeasurementSet<T>,
    grid: &GridSpec<T>,
    cfg: &RbfConfig<T>,
    range: &NormalizationRange<T>,
) -> Result<FeatureMap<T>> {
    range.validate()?;
    if m.is_empty() {
        log::warn!("no measurements available; interpolated map falls back to background");
        return Ok(FeatureMap {
            kind: FeatureKind::Ip,
            values: Grid2::filled(grid.width_px, grid.height_px, T::zero()),
        });
    }
    let dbm = rbf_interpolate_dbm(m, grid, cfg)?;
    Ok(FeatureMap { kind: FeatureKind::Ip, values: dbm.map(|v| range.forward(v)) })
}
