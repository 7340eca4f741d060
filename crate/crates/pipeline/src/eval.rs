//! Split-level evaluation and metric reports.
//!
//! Every scene yields three maps scored against its ground truth: the
//! uncalibrated empirical map `er`, the coarse prediction `pre` and, when a
//! corrector is supplied, the corrected map `cor`.

use std::path::Path;
use std::time::Instant;

use fptc_core::features::{empirical_rsrp_dbm, sample_measurements};
use fptc_core::metrics::{
    evaluate_maps, mean_record, MetricsRecord, PIXEL_MAX, SSIM_K1, SSIM_K2, SSIM_SIGMA, SSIM_WINDOW,
};
use fptc_core::{derive_seed, MeasurementSet, NormalizationRange, RadioMap, Scene};
use fptc_nn::Scalar;

use crate::config::RunConfig;
use crate::dataset::{measurement_seed, SceneEntry};
use crate::error::{Error, Result};
use crate::infer::Model;

/// Seed stream of the evaluation measurement draw.
pub const EVAL_MEASUREMENTS: u64 = 7;

pub const METRICS_HEADER: [&str; 7] = ["scene_id", "stage", "rmse_dbm", "mae_dbm", "ssim", "psnr_db", "infer_seconds"];
pub const EVAL_META_FILE: &str = "eval.meta.txt";

pub trait Predictor {
    fn predict(&mut self, scene: &Scene<f64>) -> Result<RadioMap<f64>>;
}

pub trait Corrector {
    fn correct(&mut self, p_pre: &RadioMap<f64>, m: &MeasurementSet<f64>) -> Result<RadioMap<f64>>;
}

impl<T: Scalar> Predictor for Model<T> {
    fn predict(&mut self, scene: &Scene<f64>) -> Result<RadioMap<f64>> {
        crate::infer::predict_radio_map(self, scene)
    }
}

impl<T: Scalar> Corrector for Model<T> {
    fn correct(&mut self, p_pre: &RadioMap<f64>, m: &MeasurementSet<f64>) -> Result<RadioMap<f64>> {
        crate::infer::correct_radio_map(self, p_pre, m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalOptions {
    pub seed: u64,
    pub measurement_count: usize,
    /// Record wall-clock inference seconds; when off they are written as 0.
    pub timing: bool,
}

impl EvalOptions {
    pub fn from_config(cfg: &RunConfig) -> Self {
        Self { seed: cfg.seed, measurement_count: cfg.measurement_count, timing: cfg.eval_timing }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MapKind {
    /// Uncalibrated empirical map.
    Er,
    Pre,
    Cor,
}

impl MapKind {
    pub fn name(self) -> &'static str {
        match self {
            MapKind::Er => "er",
            MapKind::Pre => "pre",
            MapKind::Cor => "cor",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneResult {
    pub scene_id: String,
    pub record: MetricsRecord,
    pub infer_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageReport {
    pub kind: MapKind,
    pub rows: Vec<SceneResult>,
    /// Mean over scenes; PSNR over finite rows only.
    pub mean: MetricsRecord,
    pub infinite_psnr: usize,
    pub mean_infer_seconds: f64,
}

impl StageReport {
    fn new(kind: MapKind, rows: Vec<SceneResult>) -> Self {
        let records: Vec<MetricsRecord> = rows.iter().map(|r| r.record).collect();
        let (mean, infinite_psnr) = mean_record(&records);
        let mean_infer_seconds = rows.iter().map(|r| r.infer_seconds).sum::<f64>() / rows.len().max(1) as f64;
        Self { kind, rows, mean, infinite_psnr, mean_infer_seconds }
    }

    /// Per-scene rows followed by a `mean` row.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(METRICS_HEADER).expect("in-memory write");
        let mut row = |id: &str, r: &MetricsRecord, secs: f64| {
            let fields = [
                id.to_string(),
                self.kind.name().to_string(),
                r.rmse_dbm.to_string(),
                r.mae_dbm.to_string(),
                r.ssim.to_string(),
                r.psnr_db.to_string(),
                secs.to_string(),
            ];
            w.write_record(&fields).expect("in-memory write");
        };
        for r in &self.rows {
            row(&r.scene_id, &r.record, r.infer_seconds);
        }
        row("mean", &self.mean, self.mean_infer_seconds);
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub er: StageReport,
    pub pre: StageReport,
    pub cor: Option<StageReport>,
}

impl EvalReport {
    pub fn stages(&self) -> Vec<&StageReport> {
        let mut out = vec![&self.pre];
        out.extend(self.cor.as_ref());
        out.push(&self.er);
        out
    }

    /// Writes `metrics_{pre,cor,er}.csv` and the metadata sidecar into `dir`.
    pub fn write(&self, dir: &Path, range: &NormalizationRange<f64>) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for stage in self.stages() {
            let path = dir.join(format!("metrics_{}.csv", stage.kind.name()));
            std::fs::write(&path, stage.to_csv()).map_err(|e| Error::io(&path, e))?;
        }
        let path = dir.join(EVAL_META_FILE);
        std::fs::write(&path, self.meta_text(range)).map_err(|e| Error::io(&path, e))
    }

    pub fn meta_text(&self, range: &NormalizationRange<f64>) -> String {
        let mut lines = vec![
            format!("ssim_window={SSIM_WINDOW}"),
            format!("ssim_sigma={SSIM_SIGMA}"),
            format!("ssim_k1={SSIM_K1}"),
            format!("ssim_k2={SSIM_K2}"),
            "ssim_windows=interior".to_string(),
            format!("pixel_max={PIXEL_MAX}"),
            format!("pixel_range_dbm={},{}", range.rsrp_min_dbm, range.rsrp_max_dbm),
            "metric_pixels=all".to_string(),
        ];
        for stage in self.stages() {
            lines.push(format!("{}.scenes={}", stage.kind.name(), stage.rows.len()));
            lines.push(format!("{}.psnr_infinite={}", stage.kind.name(), stage.infinite_psnr));
        }
        lines.join("\n") + "\n"
    }
}

fn timed<R>(timing: bool, f: impl FnOnce() -> Result<R>) -> Result<(R, f64)> {
    let start = Instant::now();
    let out = f()?;
    Ok((out, if timing { start.elapsed().as_secs_f64() } else { 0.0 }))
}

/// Measurements drawn for a scene during evaluation.
pub fn eval_measurements(entry: &SceneEntry, opts: &EvalOptions) -> Result<MeasurementSet<f64>> {
    let seed = measurement_seed(derive_seed(opts.seed, EVAL_MEASUREMENTS), &entry.id, 0);
    Ok(sample_measurements(&entry.scene, opts.measurement_count, seed)?)
}

/// Scores the empirical, predicted and (optionally) corrected maps of every scene.
///
/// The corrected map's time includes the prediction it starts from.
pub fn evaluate_split(
    predictor: &mut dyn Predictor,
    mut corrector: Option<&mut dyn Corrector>,
    scenes: &[&SceneEntry],
    range: &NormalizationRange<f64>,
    opts: &EvalOptions,
) -> Result<EvalReport> {
    let (mut er, mut pre, mut cor) = (Vec::new(), Vec::new(), Vec::new());
    for entry in scenes {
        let truth = entry.scene.ground_truth()?;
        let id = entry.id.clone();

        let (er_map, er_secs) =
            timed(opts.timing, || Ok(RadioMap::new(entry.scene.grid, empirical_rsrp_dbm(&entry.scene))?))?;
        er.push(SceneResult {
            scene_id: id.clone(),
            record: evaluate_maps(truth, &er_map, range)?,
            infer_seconds: er_secs,
        });

        let (p_pre, pre_secs) = timed(opts.timing, || predictor.predict(&entry.scene))?;
        pre.push(SceneResult {
            scene_id: id.clone(),
            record: evaluate_maps(truth, &p_pre, range)?,
            infer_seconds: pre_secs,
        });

        if let Some(c) = corrector.as_deref_mut() {
            let m = eval_measurements(entry, opts)?;
            let (p_cor, cor_secs) = timed(opts.timing, || c.correct(&p_pre, &m))?;
            cor.push(SceneResult {
                scene_id: id,
                record: evaluate_maps(truth, &p_cor, range)?,
                infer_seconds: pre_secs + cor_secs,
            });
        }
    }
    Ok(EvalReport {
        er: StageReport::new(MapKind::Er, er),
        pre: StageReport::new(MapKind::Pre, pre),
        cor: corrector.is_some().then(|| StageReport::new(MapKind::Cor, cor)),
    })
}
