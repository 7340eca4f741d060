//! Uncalibrated COST-231 Hata urban path loss and the empirical radio map built from it.

use crate::error::{Error, Result};
use crate::grid::Grid2;
use crate::normalize::NormalizationRange;
use crate::real::Real;
use crate::scene::Scene;

use super::{FeatureKind, FeatureMap};

/// Nominal frequency band of the model, MHz. Outside it the model is only warned about.
const VALID_BAND_MHZ: (f64, f64) = (1500.0, 2000.0);

/// Urban mobile-antenna correction `a(h_m)`.
#[inline]
fn mobile_correction<T: Real>(h_r_m: T) -> T {
    let l = (T::lit(11.75) * h_r_m).log10();
    T::lit(3.20) * l * l - T::lit(4.97)
}

/// COST-231 Hata path loss in dB.
///
/// `f_mhz` carrier frequency, `h_b_m` transmitter height, `h_r_m` receiver
/// height, `d_km` link distance. The metropolitan correction term is fixed at 3 dB.
pub fn cost231_pathloss<T: Real>(f_mhz: T, h_b_m: T, h_r_m: T, d_km: T) -> Result<T> {
    for (name, v) in
        [("frequency", f_mhz), ("transmitter height", h_b_m), ("receiver height", h_r_m), ("distance", d_km)]
    {
        if !(v > T::zero()) || !v.is_finite() {
            return Err(Error::Domain(format!("{name} must be > 0, got {v}")));
        }
    }
    let log_hb = h_b_m.log10();
    Ok(T::lit(46.3) + T::lit(33.9) * f_mhz.log10() - T::lit(13.82) * log_hb - mobile_correction(h_r_m)
        + (T::lit(44.9) - T::lit(6.55) * log_hb) * d_km.log10()
        + T::lit(3.0))
}

/// Empirical RSRP in dBm for every pixel, before normalization.
///
/// Distances are measured between cell centers and clamped below at half a
/// cell so the transmitter's own pixel stays finite.
pub fn empirical_rsrp_dbm<T: Real>(scene: &Scene<T>) -> Grid2<T> {
    let tx = scene.tx;
    let f = tx.freq_mhz.as_f64();
    if f < VALID_BAND_MHZ.0 || f > VALID_BAND_MHZ.1 {
        log::warn!("COST-231 applied at {f} MHz, outside its nominal 1500-2000 MHz band");
    }
    let cell_km = scene.grid.cell_size_m / T::lit(1000.0);
    let min_d = T::lit(0.5) * cell_km;
    let (tx_x, tx_y) = (T::from_usize_lossy(tx.x_px), T::from_usize_lossy(tx.y_px));
    Grid2::from_fn(scene.grid.width_px, scene.grid.height_px, |x, y| {
        let dx = T::from_usize_lossy(x) - tx_x;
        let dy = T::from_usize_lossy(y) - tx_y;
        let d = ((dx * dx + dy * dy).sqrt() * cell_km).max(min_d);
        let pl = cost231_pathloss(tx.freq_mhz, tx.h_b_m, scene.rx_height_m, d).expect("validated scene parameters");
        tx.power_dbm - pl
    })
}

/// Empirical radio map normalized into `[0, 1]`.
pub fn empirical_radio_map<T: Real>(scene: &Scene<T>, range: &NormalizationRange<T>) -> FeatureMap<T> {
    let values = empirical_rsrp_dbm(scene).map(|v| range.forward(v));
    FeatureMap { kind: FeatureKind::Er, values }
}
