use crate::grid::Grid2;
use crate::real::Real;
use crate::scene::Scene;

use super::{FeatureKind, FeatureMap};

/// One-hot raster at the transmitter cell.
pub fn transmitter_position_map<T: Real>(scene: &Scene<T>) -> FeatureMap<T> {
    let (w, h) = (scene.grid.width_px, scene.grid.height_px);
    let mut values = Grid2::filled(w, h, T::zero());
    values.set(scene.tx.x_px, scene.tx.y_px, T::one());
    FeatureMap { kind: FeatureKind::Tp, values }
}

/// Obstacle heights divided by the scene maximum; all zeros for an empty scene.
pub fn obstacle_topview_map<T: Real>(scene: &Scene<T>) -> FeatureMap<T> {
    let max = scene.heights.max_value();
    let values = if max > T::zero() { scene.heights.map(|h| h / max) } else { scene.heights.map(|_| T::zero()) };
    FeatureMap { kind: FeatureKind::Ot, values }
}
