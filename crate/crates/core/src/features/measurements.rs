use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{Grid2, GridSpec};
use crate::normalize::NormalizationRange;
use crate::real::Real;
use crate::scene::{Measurement, MeasurementSet, Scene};

use super::{FeatureKind, FeatureMap};

/// Smallest value a measured pixel may take in `M_sm`; 0 is reserved for "no sample".
pub const BACKGROUND_FLOOR: f64 = 1.0 / 255.0;

/// Draws `count` distinct obstacle-free cells uniformly and reads their ground truth.
///
/// The returned samples are sorted row-major.
pub fn sample_measurements<T: Real>(scene: &Scene<T>, count: usize, seed: u64) -> Result<MeasurementSet<T>> {
    let gt = scene.ground_truth()?;
    let free: Vec<(usize, usize)> = (0..scene.grid.height_px)
        .flat_map(|y| (0..scene.grid.width_px).map(move |x| (x, y)))
        .filter(|&(x, y)| scene.is_free(x, y))
        .collect();
    if count > free.len() {
        return Err(Error::Capacity { requested: count, available: free.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, free.len(), count).into_vec();
    picked.sort_unstable();
    let samples = picked
        .into_iter()
        .map(|i| {
            let (x, y) = free[i];
            Measurement { x_px: x, y_px: y, rsrp_dbm: gt.get(x, y) }
        })
        .collect();
    Ok(MeasurementSet::new(samples))
}

/// Sparse-measurement raster: normalized RSRP at sampled pixels, 0 elsewhere.
pub fn measurement_map<T: Real>(
    m: &MeasurementSet<T>,
    grid: &GridSpec<T>,
    range: &NormalizationRange<T>,
) -> Result<FeatureMap<T>> {
    m.validate(grid)?;
    range.validate()?;
    let floor = T::lit(BACKGROUND_FLOOR);
    let mut values = Grid2::filled(grid.width_px, grid.height_px, T::zero());
    for s in m.iter() {
        values.set(s.x_px, s.y_px, range.forward(s.rsrp_dbm).max(floor));
    }
    Ok(FeatureMap { kind: FeatureKind::Sm, values })
}
