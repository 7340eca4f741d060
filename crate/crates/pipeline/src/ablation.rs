//! Input ablation: retrain each stage with one supporting channel zeroed.
//!
//! Zeroing keeps the stack arity, so the ablated networks share the
//! architecture of the baselines. Prediction rows report the coarse map and
//! correction rows the corrected map, all on the test split.

use std::path::Path;

use fptc_core::metrics::MetricsRecord;
use fptc_core::{DatasetSplits, FeatureKind, Stage};
use fptc_nn::Scalar;

use crate::checkpoint::Checkpoint;
use crate::config::RunConfig;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::eval::{evaluate_split, Corrector, EvalOptions, EvalReport};
use crate::infer::Model;
use crate::plot::{write_line_plot, Panel};
use crate::train::{train_rmc, train_rmp};

/// Supporting prediction inputs removed one at a time.
pub const PREDICT_ABLATIONS: [FeatureKind; 3] = [FeatureKind::Er, FeatureKind::Ln, FeatureKind::Tp];
/// Supporting correction inputs removed one at a time.
pub const CORRECT_ABLATIONS: [FeatureKind; 1] = [FeatureKind::Ip];

pub const ABLATION_HEADER: [&str; 6] = ["network", "configuration", "rmse_dbm", "mae_dbm", "ssim", "psnr_db"];

/// Channels to ablate; the defaults cover every supporting input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AblationPlan {
    pub predict: Vec<FeatureKind>,
    pub correct: Vec<FeatureKind>,
}

impl Default for AblationPlan {
    fn default() -> Self {
        Self { predict: PREDICT_ABLATIONS.to_vec(), correct: CORRECT_ABLATIONS.to_vec() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub stage: Stage,
    /// `None` for the full-input baseline.
    pub removed: Option<FeatureKind>,
    pub record: MetricsRecord,
}

impl AblationRow {
    pub fn network(&self) -> &'static str {
        match self.stage {
            Stage::Predict => "RMP-GAN",
            Stage::Correct => "RMC-GAN",
        }
    }

    pub fn configuration(&self) -> String {
        match self.removed {
            None => "original".to_string(),
            Some(k) => format!("removing {}", k.tag()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationTable {
    pub rows: Vec<AblationRow>,
}

impl AblationTable {
    pub fn get(&self, stage: Stage, removed: Option<FeatureKind>) -> Option<&AblationRow> {
        self.rows.iter().find(|r| r.stage == stage && r.removed == removed)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(ABLATION_HEADER).expect("in-memory write");
        for r in &self.rows {
            let m = &r.record;
            w.write_record([
                r.network().to_string(),
                r.configuration(),
                m.rmse_dbm.to_string(),
                m.mae_dbm.to_string(),
                m.ssim.to_string(),
                m.psnr_db.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }

    /// One panel per metric; x is the row index of the CSV table.
    pub fn panels(&self) -> Vec<Panel> {
        let series = |label: &str, f: fn(&MetricsRecord) -> f64| Panel {
            label: label.to_string(),
            points: self.rows.iter().enumerate().map(|(i, r)| (i as f64, f(&r.record))).collect(),
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
        write_line_plot(stem, "Input ablation", "configuration (table row)", &self.panels())
    }
}

fn evaluate<T: Scalar>(
    cfg: &RunConfig,
    data: &Dataset,
    splits: &DatasetSplits,
    rmp: &Checkpoint,
    rmc: Option<&Checkpoint>,
) -> Result<EvalReport> {
    let mut predictor = Model::<T>::from_checkpoint(rmp)?;
    let mut corrector = rmc.map(Model::<T>::from_checkpoint).transpose()?;
    let opts = EvalOptions { timing: false, ..EvalOptions::from_config(cfg) };
    evaluate_split(
        &mut predictor,
        corrector.as_mut().map(|c| c as &mut dyn Corrector),
        &data.select(&splits.test)?,
        &cfg.range,
        &opts,
    )
}

/// Runs the ablation plan.
///
/// `baselines` supplies already trained full-input prediction and correction
/// checkpoints; without them both are trained first. Every ablated
/// correction network is trained against the full-input prediction stage.
pub fn ablation_suite<T: Scalar>(
    cfg: &RunConfig,
    data: &Dataset,
    splits: &DatasetSplits,
    plan: &AblationPlan,
    baselines: Option<(&Checkpoint, &Checkpoint)>,
) -> Result<AblationTable> {
    let trained;
    let (rmp, rmc) = match baselines {
        Some(b) => b,
        None => {
            let rmp = train_rmp::<T>(cfg, data, splits, &[])?.checkpoint;
            let rmc = train_rmc::<T>(cfg, data, splits, &rmp, &[])?.checkpoint;
            trained = (rmp, rmc);
            (&trained.0, &trained.1)
        }
    };
    let base = evaluate::<T>(cfg, data, splits, rmp, Some(rmc))?;
    let mut rows = vec![AblationRow { stage: Stage::Predict, removed: None, record: base.pre.mean }];
    for &kind in &plan.predict {
        log::info!("ablation: prediction without {}", kind.tag());
        let ckpt = train_rmp::<T>(cfg, data, splits, &[kind])?.checkpoint;
        let report = evaluate::<T>(cfg, data, splits, &ckpt, None)?;
        rows.push(AblationRow { stage: Stage::Predict, removed: Some(kind), record: report.pre.mean });
    }
    let cor = base.cor.as_ref().expect("corrector supplied");
    rows.push(AblationRow { stage: Stage::Correct, removed: None, record: cor.mean });
    for &kind in &plan.correct {
        log::info!("ablation: correction without {}", kind.tag());
        let ckpt = train_rmc::<T>(cfg, data, splits, rmp, &[kind])?.checkpoint;
        let report = evaluate::<T>(cfg, data, splits, rmp, Some(&ckpt))?;
        let cor = report.cor.expect("corrector supplied");
        rows.push(AblationRow { stage: Stage::Correct, removed: Some(kind), record: cor.mean });
    }
    Ok(AblationTable { rows })
}
