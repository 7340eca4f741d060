//! Line-of-sight classification on the obstacle height raster.

use crate::error::{Error, Result};
use crate::grid::Grid2;
use crate::real::Real;
use crate::scene::Scene;

use super::{FeatureKind, FeatureMap};

/// Every cell touched by the segment between the centers of `from` and `to`,
/// in traversal order, endpoints included.
///
/// When the segment passes exactly through a cell corner both side
/// neighbours are emitted, so diagonal steps never leak past an obstacle.
pub fn supercover_line(from: (i64, i64), to: (i64, i64)) -> Vec<(i64, i64)> {
    let (dx, dy) = (to.0 - from.0, to.1 - from.1);
    let (nx, ny) = (dx.abs(), dy.abs());
    let (sx, sy) = (dx.signum(), dy.signum());
    let (mut x, mut y) = from;
    let mut cells = Vec::with_capacity((nx + ny + 1) as usize);
    cells.push((x, y));
    let (mut ix, mut iy) = (0, 0);
    while ix < nx || iy < ny {
        let decision = (1 + 2 * ix) * ny - (1 + 2 * iy) * nx;
        if decision == 0 {
            cells.push((x + sx, y));
            cells.push((x, y + sy));
            x += sx;
            y += sy;
            ix += 1;
            iy += 1;
        } else if decision < 0 {
            x += sx;
            ix += 1;
        } else {
            y += sy;
            iy += 1;
        }
        cells.push((x, y));
    }
    cells
}

#[inline]
fn dist<T: Real>(a: (T, T), b: (T, T)) -> T {
    let (dx, dy) = (a.0 - b.0, a.1 - b.1);
    (dx * dx + dy * dy).sqrt()
}

/// LoS boundary height above `point` for the transmitter-receiver link.
///
/// Linear in the distance from the receiver: `h_r` at the receiver, `h_b` at
/// the transmitter. Pixel units cancel in the ratio.
pub fn los_boundary_height<T: Real>(point: (T, T), rx: (T, T), tx: (T, T), h_b_m: T, h_r_m: T) -> Result<T> {
    let span = dist(tx, rx);
    if span == T::zero() {
        return Err(Error::DegenerateGeometry("transmitter and receiver share a position".into()));
    }
    Ok(h_r_m + dist(point, rx) / span * (h_b_m - h_r_m).abs())
}

fn to_real<T: Real>(p: (i64, i64)) -> (T, T) {
    (T::from_i64(p.0).expect("pixel index"), T::from_i64(p.1).expect("pixel index"))
}

/// Point where the segment `tx -> rx` leaves cell `c`, measured along the
/// segment. Over the cell footprint this is the lowest point of the link.
fn exit_point<T: Real>(tx: (T, T), rx: (T, T), c: (T, T)) -> (T, T) {
    let half = T::lit(0.5);
    let mut t = T::one();
    for (p0, p1, center) in [(tx.0, rx.0, c.0), (tx.1, rx.1, c.1)] {
        let d = p1 - p0;
        if d != T::zero() {
            let (a, b) = ((center - half - p0) / d, (center + half - p0) / d);
            t = t.min(a.max(b));
        }
    }
    (tx.0 + t * (rx.0 - tx.0), tx.1 + t * (rx.1 - tx.1))
}

/// Number of intermediate cells between the transmitter and `rx` whose
/// obstacle height reaches the LoS boundary. Zero means line of sight.
///
/// Each cell is tested at the point where the segment leaves it toward the
/// receiver, so an obstacle blocks whenever the link dips below its top
/// anywhere above its footprint.
pub fn obstruction_count<T: Real>(scene: &Scene<T>, rx: (usize, usize)) -> usize {
    let tx = (scene.tx.x_px as i64, scene.tx.y_px as i64);
    let rxi = (rx.0 as i64, rx.1 as i64);
    if tx == rxi {
        return 0;
    }
    let (tx_r, rx_r) = (to_real::<T>(tx), to_real::<T>(rxi));
    supercover_line(tx, rxi)
        .into_iter()
        .filter(|&c| c != tx && c != rxi)
        .filter(|&(x, y)| {
            let h = scene.heights.get(x as usize, y as usize);
            if h <= T::zero() {
                return false;
            }
            let point = exit_point(tx_r, rx_r, to_real((x, y)));
            let boundary = los_boundary_height(point, rx_r, tx_r, scene.tx.h_b_m, scene.rx_height_m).expect("tx != rx");
            h >= boundary
        })
        .count()
}

/// Binary LoS (1) / NLoS (0) raster.
pub fn los_indicator_map<T: Real>(scene: &Scene<T>) -> FeatureMap<T> {
    let values = Grid2::from_fn(scene.grid.width_px, scene.grid.height_px, |x, y| {
        if obstruction_count(scene, (x, y)) == 0 {
            T::one()
        } else {
            T::zero()
        }
    });
    FeatureMap { kind: FeatureKind::Ln, values }
}
