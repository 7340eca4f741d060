//! Correction quality against measurement density.

use std::path::Path;

use fptc_core::metrics::MetricsRecord;
use fptc_core::{DatasetSplits, GridSpec};
use fptc_nn::Scalar;

use crate::checkpoint::Checkpoint;
use crate::config::RunConfig;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::eval::{evaluate_split, Corrector, EvalOptions};
use crate::infer::Model;
use crate::plot::{write_line_plot, Panel};
use crate::train::train_rmc;

pub const SWEEP_HEADER: [&str; 7] =
    ["percentage", "measurement_count", "rmse_dbm", "mae_dbm", "ssim", "psnr_db", "psnr_infinite"];

/// Measurements for a percentage of the grid's pixels, at least one.
pub fn measurement_count_for(percentage: f64, grid: &GridSpec<f64>) -> usize {
    ((percentage / 100.0 * grid.len() as f64).round() as usize).max(1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub percentage: f64,
    pub measurement_count: usize,
    /// Mean over the test split of the corrected maps.
    pub mean: MetricsRecord,
    pub infinite_psnr: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCurve {
    pub points: Vec<SweepPoint>,
}

impl SweepCurve {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(SWEEP_HEADER).expect("in-memory write");
        for p in &self.points {
            let m = &p.mean;
            w.write_record([
                p.percentage.to_string(),
                p.measurement_count.to_string(),
                m.rmse_dbm.to_string(),
                m.mae_dbm.to_string(),
                m.ssim.to_string(),
                m.psnr_db.to_string(),
                p.infinite_psnr.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }

    pub fn panels(&self) -> Vec<Panel> {
        let series = |label: &str, f: fn(&MetricsRecord) -> f64| Panel {
            label: label.to_string(),
            points: self.points.iter().map(|p| (p.percentage, f(&p.mean))).collect(),
        };
        vec![
            series("RMSE (dB)", |m| m.rmse_dbm),
            series("MAE (dB)", |m| m.mae_dbm),
            series("SSIM", |m| m.ssim),
            series("PSNR (dB)", |m| m.psnr_db),
        ]
    }

    /// Writes `{stem}.csv`, `{stem}.png` and `{stem}.svg`.
    pub fn write(&self, stem: &Path) -> Result<()> {
        let csv = stem.with_extension("csv");
        if let Some(dir) = stem.parent() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        std::fs::write(&csv, self.to_csv()).map_err(|e| Error::io(&csv, e))?;
        write_line_plot(stem, "Correction vs. measurement density", "measurements (% of pixels)", &self.panels())
    }
}

/// Evaluates the correction stage at each percentage of measured pixels.
///
/// With `cfg.sweep_retrain` the correction stage is retrained at every
/// density; otherwise `rmc` is evaluated with the changed measurement count.
pub fn density_sweep<T: Scalar>(
    percentages: &[f64],
    cfg: &RunConfig,
    data: &Dataset,
    splits: &DatasetSplits,
    rmp: &Checkpoint,
    rmc: Option<&Checkpoint>,
) -> Result<SweepCurve> {
    if percentages.is_empty() {
        return Err(Error::config("sweep_percentages", "no percentages given"));
    }
    if !cfg.sweep_retrain && rmc.is_none() {
        return Err(Error::config("sweep_retrain", "a correction checkpoint is required when not retraining"));
    }
    let test = data.select(&splits.test)?;
    let mut points = Vec::with_capacity(percentages.len());
    for &pct in percentages {
        if !(pct > 0.0 && pct <= 100.0) {
            return Err(Error::config("sweep_percentages", format!("{pct} is not in (0, 100]")));
        }
        let count = measurement_count_for(pct, &cfg.grid_spec());
        log::info!("density sweep: {pct}% ({count} measurements)");
        let point_cfg = RunConfig { measurement_count: count, ..cfg.clone() };
        let trained;
        let ckpt = if cfg.sweep_retrain {
            trained = train_rmc::<T>(&point_cfg, data, splits, rmp, &[])?.checkpoint;
            &trained
        } else {
            rmc.expect("checked above")
        };
        let mut predictor = Model::<T>::from_checkpoint(rmp)?;
        let mut corrector = Model::<T>::from_checkpoint(ckpt)?;
        let opts = EvalOptions { timing: false, ..EvalOptions::from_config(&point_cfg) };
        let report =
            evaluate_split(&mut predictor, Some(&mut corrector as &mut dyn Corrector), &test, &cfg.range, &opts)?;
        let cor = report.cor.expect("corrector supplied");
        points.push(SweepPoint {
            percentage: pct,
            measurement_count: count,
            mean: cor.mean,
            infinite_psnr: cor.infinite_psnr,
        });
    }
    Ok(SweepCurve { points })
}
