//! `fptc`: run the two-stage radio-map pipeline from a config file.
//!
//! Every command reads the same `key = value` config, applies `--set`
//! overrides, and writes its outputs plus a manifest under `--out`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fptc_core::features::empirical_rsrp_dbm;
use fptc_core::split::split_dataset;
use fptc_core::{DatasetSplits, RadioMap, Stage};
use fptc_pipeline::ablation::{ablation_suite, AblationPlan};
use fptc_pipeline::checkpoint::checkpoint_path;
use fptc_pipeline::config::SEED_ENV;
use fptc_pipeline::dataset::{load_splits, resolve_splits, save_splits};
use fptc_pipeline::eval::{eval_measurements, evaluate_split, Corrector, EvalOptions};
use fptc_pipeline::export::export_map;
use fptc_pipeline::infer::{correct_radio_map, predict_radio_map};
use fptc_pipeline::manifest::Manifest;
use fptc_pipeline::sweep::density_sweep;
use fptc_pipeline::train::write_log;
use fptc_pipeline::{train_rmc, train_rmp, Checkpoint, Dataset, Error, Model32, Result, RunConfig};

const SCENES_DIR: &str = "scenes";
const SPLITS_FILE: &str = "splits.json";
const LOG_FILE: &str = "train_log.csv";

#[derive(Parser)]
#[command(name = "fptc", version, about = "First-predict-then-correct radio-map construction")]
struct Cli {
    /// Run configuration (`key = value` lines).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    /// Override one config key; repeatable, applied in order.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE", value_parser = parse_override)]
    set: Vec<(String, String)>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic scenes with oracle ground truth into `{out}/scenes`.
    Synth {
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
    /// Validate a scene directory tree.
    Ingest,
    /// Write the five-way split to `{out}/splits.json`.
    Split,
    /// Train the prediction network.
    TrainRmp,
    /// Train the correction network against the trained prediction network.
    TrainRmc,
    /// Score the test split; prediction only when no correction checkpoint exists.
    Eval,
    /// Retrain with each supporting input zeroed and tabulate the metrics.
    Ablate,
    /// Correction metrics against the share of measured pixels.
    SweepDensity,
    /// Write ground-truth, empirical, predicted and corrected maps of the test split.
    ExportMaps,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Synth { .. } => "synth",
            Command::Ingest => "ingest",
            Command::Split => "split",
            Command::TrainRmp => "train-rmp",
            Command::TrainRmc => "train-rmc",
            Command::Eval => "eval",
            Command::Ablate => "ablate",
            Command::SweepDensity => "sweep-density",
            Command::ExportMaps => "export-maps",
        }
    }
}

fn parse_override(s: &str) -> std::result::Result<(String, String), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected KEY=VALUE, got `{s}`"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

struct Run {
    cfg: RunConfig,
    out: PathBuf,
}

impl Run {
    fn dataset_dir(&self) -> PathBuf {
        self.cfg.dataset_dir.clone().unwrap_or_else(|| self.out.join(SCENES_DIR))
    }

    fn dataset(&self) -> Result<Dataset> {
        Dataset::load(&self.dataset_dir())
    }

    /// Configured splits, else the ones written by `split`, else a fresh seeded split.
    fn splits(&self, data: &Dataset) -> Result<DatasetSplits> {
        let saved = self.out.join(SPLITS_FILE);
        if self.cfg.splits_file.is_none() && saved.is_file() {
            return load_splits(&saved);
        }
        resolve_splits(&self.cfg, data)
    }

    fn checkpoint(&self, stage: Stage) -> Result<Checkpoint> {
        Checkpoint::load(&checkpoint_path(&self.out, stage))
    }

    fn optional_checkpoint(&self, stage: Stage) -> Result<Option<Checkpoint>> {
        match self.checkpoint(stage) {
            Ok(c) => Ok(Some(c)),
            Err(Error::MissingCheckpoint(_)) => Ok(None),
            Err(e) => Err(e),
        }
    }

    fn save_stage(&self, ckpt: &Checkpoint) -> Result<PathBuf> {
        let dir = self.out.join(ckpt.stage().name());
        let path = ckpt.save(&dir)?;
        write_log(&ckpt.header.history, &dir.join(LOG_FILE))?;
        Ok(path)
    }
}

fn execute(command: &Command, run: &Run) -> Result<()> {
    let cfg = &run.cfg;
    match command {
        Command::Synth { count } => {
            let dir = run.out.join(SCENES_DIR);
            Dataset::synthesize(cfg, *count)?.save(&dir)?;
            println!("wrote {count} scenes to {}", dir.display());
        }
        Command::Ingest => {
            let data = run.dataset()?;
            println!("{} valid scenes in {}", data.len(), run.dataset_dir().display());
        }
        Command::Split => {
            let data = run.dataset()?;
            let splits = match &cfg.splits_file {
                Some(_) => resolve_splits(cfg, &data)?,
                None => split_dataset(&data.ids(), cfg.seed)?,
            };
            let path = run.out.join(SPLITS_FILE);
            save_splits(&splits, &path)?;
            println!("split sizes {:?} written to {}", splits.sizes(), path.display());
        }
        Command::TrainRmp => {
            let data = run.dataset()?;
            let splits = run.splits(&data)?;
            let out = train_rmp::<f32>(cfg, &data, &splits, &[])?;
            println!("prediction checkpoint {}", run.save_stage(&out.checkpoint)?.display());
        }
        Command::TrainRmc => {
            let rmp = run.checkpoint(Stage::Predict)?;
            let data = run.dataset()?;
            let splits = run.splits(&data)?;
            let out = train_rmc::<f32>(cfg, &data, &splits, &rmp, &[])?;
            println!("correction checkpoint {}", run.save_stage(&out.checkpoint)?.display());
        }
        Command::Eval => {
            let rmp = run.checkpoint(Stage::Predict)?;
            let rmc = run.optional_checkpoint(Stage::Correct)?;
            if rmc.is_none() {
                log::info!("no correction checkpoint; evaluating the prediction stage only");
            }
            let data = run.dataset()?;
            let test = data.select(&run.splits(&data)?.test)?;
            let mut predictor = Model32::from_checkpoint(&rmp)?;
            let mut corrector = rmc.as_ref().map(Model32::from_checkpoint).transpose()?;
            let report = evaluate_split(
                &mut predictor,
                corrector.as_mut().map(|c| c as &mut dyn Corrector),
                &test,
                &cfg.range,
                &EvalOptions::from_config(cfg),
            )?;
            let dir = run.out.join("eval");
            report.write(&dir, &cfg.range)?;
            for stage in report.stages() {
                println!(
                    "{}: mean rmse {:.4} dBm over {} scenes",
                    stage.kind.name(),
                    stage.mean.rmse_dbm,
                    stage.rows.len()
                );
            }
        }
        Command::Ablate => {
            let data = run.dataset()?;
            let splits = run.splits(&data)?;
            let rmp = run.optional_checkpoint(Stage::Predict)?;
            let rmc = run.optional_checkpoint(Stage::Correct)?;
            let baselines = rmp.as_ref().zip(rmc.as_ref());
            let table = ablation_suite::<f32>(cfg, &data, &splits, &AblationPlan::default(), baselines)?;
            let stem = run.out.join("ablation");
            table.write(&stem)?;
            println!("ablation table {}", stem.with_extension("csv").display());
        }
        Command::SweepDensity => {
            let rmp = run.checkpoint(Stage::Predict)?;
            let rmc = if cfg.sweep_retrain { None } else { Some(run.checkpoint(Stage::Correct)?) };
            let data = run.dataset()?;
            let splits = run.splits(&data)?;
            let curve = density_sweep::<f32>(&cfg.sweep_percentages, cfg, &data, &splits, &rmp, rmc.as_ref())?;
            let stem = run.out.join("sweep_density");
            curve.write(&stem)?;
            println!("density sweep {}", stem.with_extension("csv").display());
        }
        Command::ExportMaps => export_maps(run)?,
    }
    Ok(())
}

fn export_maps(run: &Run) -> Result<()> {
    let cfg = &run.cfg;
    let rmp = run.checkpoint(Stage::Predict)?;
    let rmc = run.optional_checkpoint(Stage::Correct)?;
    let data = run.dataset()?;
    let test = data.select(&run.splits(&data)?.test)?;
    let mut predictor = Model32::from_checkpoint(&rmp)?;
    let mut corrector = rmc.as_ref().map(Model32::from_checkpoint).transpose()?;
    let opts = EvalOptions::from_config(cfg);
    let root = run.out.join("maps");
    for entry in &test {
        let dir = root.join(&entry.id);
        let scene = &entry.scene;
        if let Some(gt) = &scene.ground_truth {
            export_map(gt, &cfg.range, &dir.join("gt"))?;
        }
        let er = RadioMap::new(scene.grid, empirical_rsrp_dbm(scene))?;
        export_map(&er, &cfg.range, &dir.join("er"))?;
        let pre = predict_radio_map(&mut predictor, scene)?;
        export_map(&pre, &cfg.range, &dir.join("pre"))?;
        if let Some(c) = corrector.as_mut() {
            let cor = correct_radio_map(c, &pre, &eval_measurements(entry, &opts)?)?;
            export_map(&cor, &cfg.range, &dir.join("cor"))?;
        }
    }
    println!("exported {} scenes to {}", test.len(), root.display());
    Ok(())
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = (|| {
        let env_seed = std::env::var(SEED_ENV).ok();
        let cfg = RunConfig::load(cli.config.as_deref(), &cli.set, env_seed.as_deref())?;
        ensure_dir(&cli.out)?;
        Manifest::new(cli.command.name(), &cfg, &cli.set).write(&cli.out)?;
        execute(&cli.command, &Run { cfg, out: cli.out.clone() })
    })();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace(['\n', '\r'], " ");
            eprintln!("error: kind={} msg={msg}", e.kind());
            ExitCode::FAILURE
        }
    }
}
