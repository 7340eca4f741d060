//! Seeded synthetic urban scenes and a simple propagation oracle for their ground truth.
//!
//! The oracle is free-space path loss plus a per-cell blocking penalty and a
//! smooth shadowing field. It is a learnable stand-in for measured data, not
//! a propagation model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::obstruction_count;
use crate::grid::{Grid2, GridSpec};
use crate::real::Real;
use crate::scene::{RadioMap, Scene, TransmitterConfig};

const TX_PLACEMENT_RETRIES: usize = 10_000;

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Span<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: PartialOrd + Copy + std::fmt::Display> Span<T> {
    pub fn new(lo: T, hi: T) -> Self {
        Self { lo, hi }
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        if self.lo > self.hi {
            return Err(Error::validation(format!("{name} range {}..{} is empty", self.lo, self.hi)));
        }
        Ok(())
    }
}

fn draw_usize(rng: &mut ChaCha8Rng, span: Span<usize>) -> usize {
    rng.random_range(span.lo..=span.hi)
}

fn draw_real<T: Real>(rng: &mut ChaCha8Rng, span: Span<T>) -> T {
    let (lo, hi) = (span.lo.as_f64(), span.hi.as_f64());
    if lo == hi {
        span.lo
    } else {
        T::lit(rng.random_range(lo..=hi))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthParams<T> {
    pub n_buildings: Span<usize>,
    /// Rectangle side lengths in pixels.
    pub footprint_px: Span<usize>,
    pub height_m: Span<T>,
    /// Minimum distance of the transmitter from every edge.
    pub tx_margin_px: usize,
    pub tx_height_m: Span<T>,
    pub tx_power_dbm: T,
    pub freq_mhz: T,
    pub rx_height_m: T,
    pub cell_size_m: T,
    pub seed: u64,
}

impl<T: Real> Default for SynthParams<T> {
    fn default() -> Self {
        Self {
            n_buildings: Span::new(4, 12),
            footprint_px: Span::new(3, 10),
            height_m: Span::new(T::lit(5.0), T::lit(45.0)),
            tx_margin_px: 4,
            tx_height_m: Span::new(T::lit(20.0), T::lit(40.0)),
            tx_power_dbm: T::lit(10.0),
            freq_mhz: T::lit(2000.0),
            rx_height_m: T::lit(1.5),
            cell_size_m: T::lit(10.0),
            seed: 0,
        }
    }
}

impl<T: Real> SynthParams<T> {
    pub fn validate(&self, grid: &GridSpec<T>) -> Result<()> {
        self.n_buildings.validate("n_buildings")?;
        self.footprint_px.validate("footprint_px")?;
        self.height_m.validate("height_m")?;
        self.tx_height_m.validate("tx_height_m")?;
        if self.footprint_px.lo == 0 {
            return Err(Error::validation("building footprint must be at least one pixel"));
        }
        if self.footprint_px.hi > grid.width_px.min(grid.height_px) {
            return Err(Error::validation(format!(
                "footprint up to {} px does not fit a {}x{} grid",
                self.footprint_px.hi, grid.width_px, grid.height_px
            )));
        }
        if !(self.height_m.lo > T::zero()) {
            return Err(Error::validation("building heights must be > 0"));
        }
        if 2 * self.tx_margin_px >= grid.width_px.min(grid.height_px) {
            return Err(Error::validation(format!(
                "transmitter margin {} leaves no room on a {}x{} grid",
                self.tx_margin_px, grid.width_px, grid.height_px
            )));
        }
        if !(self.rx_height_m > T::zero() && self.rx_height_m < self.tx_height_m.lo) {
            return Err(Error::validation("receiver height must be positive and below every transmitter height"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleParams<T> {
    /// Penalty per obstructing cell, dB.
    pub block_loss_db: T,
    /// Cap on the number of penalized cells.
    pub block_cap: usize,
    pub shadow_sigma_db: T,
    /// Gaussian smoothing length of the shadowing field, pixels.
    pub shadow_smooth_px: T,
    pub seed: u64,
}

impl<T: Real> Default for OracleParams<T> {
    fn default() -> Self {
        Self {
            block_loss_db: T::lit(3.0),
            block_cap: 10,
            shadow_sigma_db: T::lit(2.0),
            shadow_smooth_px: T::lit(8.0),
            seed: 0,
        }
    }
}

impl<T: Real> OracleParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.block_loss_db > T::zero()) {
            return Err(Error::validation("block_loss_db must be > 0"));
        }
        if self.block_cap == 0 {
            return Err(Error::validation("block_cap must be >= 1"));
        }
        if !(self.shadow_sigma_db >= T::zero()) {
            return Err(Error::validation("shadow_sigma_db must be >= 0"));
        }
        if !(self.shadow_smooth_px > T::zero()) {
            return Err(Error::validation("shadow_smooth_px must be > 0"));
        }
        Ok(())
    }
}

/// Random axis-aligned buildings and one transmitter on a free cell.
pub fn generate_scene<T: Real>(grid: GridSpec<T>, p: &SynthParams<T>) -> Result<Scene<T>> {
    grid.validate()?;
    p.validate(&grid)?;
    let grid = GridSpec { cell_size_m: p.cell_size_m, ..grid };
    let (w, h) = (grid.width_px, grid.height_px);
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut heights = Grid2::filled(w, h, T::zero());
    let n = draw_usize(&mut rng, p.n_buildings);
    for _ in 0..n {
        let bw = draw_usize(&mut rng, p.footprint_px);
        let bh = draw_usize(&mut rng, p.footprint_px);
        let x0 = rng.random_range(0..=w - bw);
        let y0 = rng.random_range(0..=h - bh);
        let height = draw_real(&mut rng, p.height_m);
        for y in y0..y0 + bh {
            for x in x0..x0 + bw {
                if heights.get(x, y) < height {
                    heights.set(x, y, height);
                }
            }
        }
    }
    let m = p.tx_margin_px;
    let position = (0..TX_PLACEMENT_RETRIES)
        .map(|_| (rng.random_range(m..w - m), rng.random_range(m..h - m)))
        .find(|&(x, y)| heights.get(x, y) <= T::zero())
        .ok_or_else(|| {
            Error::Generation(format!("no free transmitter cell found after {TX_PLACEMENT_RETRIES} tries"))
        })?;
    let tx = TransmitterConfig {
        x_px: position.0,
        y_px: position.1,
        h_b_m: draw_real(&mut rng, p.tx_height_m),
        power_dbm: p.tx_power_dbm,
        freq_mhz: p.freq_mhz,
    };
    Scene::new(grid, heights, tx, p.rx_height_m, None)
}

/// Free-space path loss in dB for a distance in meters.
pub fn free_space_pathloss<T: Real>(d_m: T, f_mhz: T) -> T {
    T::lit(20.0) * d_m.log10() + T::lit(20.0) * f_mhz.log10() - T::lit(27.55)
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as i64;
    let k: Vec<f64> = (-radius..=radius).map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let sum: f64 = k.iter().sum();
    k.into_iter().map(|v| v / sum).collect()
}

/// One separable pass along rows (`horizontal`) or columns, renormalizing at the borders.
fn blur_pass(src: &[f64], w: usize, h: usize, kernel: &[f64], horizontal: bool) -> Vec<f64> {
    let radius = (kernel.len() / 2) as i64;
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let (mut acc, mut norm) = (0.0, 0.0);
            for (ki, kv) in kernel.iter().enumerate() {
                let off = ki as i64 - radius;
                let (sx, sy) = if horizontal { (x as i64 + off, y as i64) } else { (x as i64, y as i64 + off) };
                if sx >= 0 && sy >= 0 && (sx as usize) < w && (sy as usize) < h {
                    acc += kv * src[sy as usize * w + sx as usize];
                    norm += kv;
                }
            }
            out[y * w + x] = acc / norm;
        }
    }
    out
}

/// Zero-mean Gaussian shadowing field with sample standard deviation `sigma_db`.
pub fn shadow_field<T: Real>(w: usize, h: usize, sigma_db: T, smooth_px: T, seed: u64) -> Grid2<T> {
    if sigma_db <= T::zero() {
        return Grid2::filled(w, h, T::zero());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Vec<f64> = (0..w * h).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let kernel = gaussian_kernel(smooth_px.as_f64());
    let smooth = blur_pass(&blur_pass(&noise, w, h, &kernel, true), w, h, &kernel, false);
    let n = smooth.len() as f64;
    let mean = smooth.iter().sum::<f64>() / n;
    let std = (smooth.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    let scale = if std > 0.0 { sigma_db.as_f64() / std } else { 0.0 };
    Grid2::from_vec(w, h, smooth.into_iter().map(|v| T::lit((v - mean) * scale)).collect()).expect("shape preserved")
}

/// Ground-truth RSRP from the synthetic propagation oracle.
pub fn oracle_radio_map<T: Real>(scene: &Scene<T>, p: &OracleParams<T>) -> Result<RadioMap<T>> {
    p.validate()?;
    let (w, h) = (scene.grid.width_px, scene.grid.height_px);
    let shadow = shadow_field(w, h, p.shadow_sigma_db, p.shadow_smooth_px, p.seed);
    let cell = scene.grid.cell_size_m;
    let min_d = T::lit(0.5) * cell;
    let (tx_x, tx_y) = (T::from_usize_lossy(scene.tx.x_px), T::from_usize_lossy(scene.tx.y_px));
    let cap = p.block_cap;
    let values = Grid2::from_fn(w, h, |x, y| {
        let dx = T::from_usize_lossy(x) - tx_x;
        let dy = T::from_usize_lossy(y) - tx_y;
        let d = ((dx * dx + dy * dy).sqrt() * cell).max(min_d);
        let blocked = obstruction_count(scene, (x, y)).min(cap);
        scene.tx.power_dbm
            - free_space_pathloss(d, scene.tx.freq_mhz)
            - T::from_usize_lossy(blocked) * p.block_loss_db
            - shadow.get(x, y)
    });
    RadioMap::new(scene.grid, values)
}

/// Scene plus oracle ground truth, with per-call seeds derived from `seed`.
pub fn generate_labeled_scene<T: Real>(
    grid: GridSpec<T>,
    synth: &SynthParams<T>,
    oracle: &OracleParams<T>,
    seed: u64,
) -> Result<Scene<T>> {
    let synth = SynthParams { seed: crate::seed::derive_seed(seed, 0), ..synth.clone() };
    let oracle = OracleParams { seed: crate::seed::derive_seed(seed, 1), ..oracle.clone() };
    let mut scene = generate_scene(grid, &synth)?;
    scene.ground_truth = Some(oracle_radio_map(&scene, &oracle)?);
    Ok(scene)
}
