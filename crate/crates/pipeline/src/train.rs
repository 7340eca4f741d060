//! Adversarial training of one stage.
//!
//! Each step first updates the discriminator on a real and a generated batch,
//! then updates the generator on the non-saturating adversarial loss plus
//! `lambda_l2` times the mean squared error against the ground truth. After
//! every epoch the generator is evaluated on the validation scenes and the
//! parameters with the lowest mean RMSE are kept.

use std::path::Path;

use fptc_core::features::sample_measurements;
use fptc_core::metrics::rmse;
use fptc_core::{derive_seed, DatasetSplits, FeatureKind, RadioMap, Stage};
use fptc_nn::{
    bce_with_logits, export_state, generator_adversarial, reconstruction_grad, reconstruction_loss, zero_grads, Adam,
    AdamConfig, Ctx, Discriminator, Generator, Layer, Scalar, Tensor,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::checkpoint::{Checkpoint, CheckpointHeader};
use crate::config::{RunConfig, StageSetup};
use crate::dataset::{
    batch_tensor, correction_stack, map_values, measurement_seed, output_map, prediction_stack, stack_values, Dataset,
    SceneEntry,
};
use crate::error::{Error, Result};
use crate::infer::Model;

const GENERATOR_INIT: u64 = 1;
const DISCRIMINATOR_INIT: u64 = 2;
const DROPOUT: u64 = 3;
const SHUFFLE: u64 = 4;
/// Measurement draws during training, one round per epoch.
pub const TRAIN_MEASUREMENTS: u64 = 5;
/// Fixed measurement draw for validation.
pub const VAL_MEASUREMENTS: u64 = 6;

/// Inference batch size; results do not depend on it.
pub(crate) const INFER_BATCH: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub stage: Stage,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub lambda_l2: f64,
    pub seed: u64,
    /// Measurements per scene for the correction stage.
    pub measurement_count: usize,
    /// Input channels replaced by zeros in training and inference.
    pub masked: Vec<FeatureKind>,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let key = |f: &str| format!("{}_{f}", self.stage.name());
        if !(self.learning_rate > 0.0) {
            return Err(Error::config(key("learning_rate"), "must be positive"));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(b > 0.0 && b < 1.0) {
                return Err(Error::config(key(name), "must lie in (0, 1)"));
            }
        }
        if self.batch_size == 0 {
            return Err(Error::config(key("batch_size"), "must be positive"));
        }
        if self.epochs == 0 {
            return Err(Error::config(key("epochs"), "must be positive"));
        }
        if !(self.lambda_l2 >= 0.0) {
            return Err(Error::config(key("lambda_l2"), "must be non-negative"));
        }
        if self.stage == Stage::Correct && self.measurement_count == 0 {
            return Err(Error::config("measurement_count", "must be positive"));
        }
        if let Some(k) = self.masked.iter().find(|k| !self.stage.channel_order().contains(k)) {
            return Err(Error::config(
                "masked",
                format!("{} is not an input of the {} stage", k.tag(), self.stage.name()),
            ));
        }
        Ok(())
    }
}

/// Per-epoch means of the training losses and the validation RMSE in dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub d_loss: f64,
    pub g_adv: f64,
    pub g_l2: f64,
    pub val_rmse: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub epoch: usize,
    pub step: usize,
    pub d_loss: f64,
    pub g_adv: f64,
    pub g_l2: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub checkpoint: Checkpoint,
    pub steps: Vec<StepRecord>,
}

pub const LOG_HEADER: &str = "epoch,d_loss,g_adv,g_l2,val_rmse";

/// Training log CSV over every epoch of `history`.
pub fn log_csv(history: &[EpochRecord]) -> String {
    let mut out = String::from(LOG_HEADER);
    out.push('\n');
    for r in history {
        out.push_str(&format!("{},{},{},{},{}\n", r.epoch, r.d_loss, r.g_adv, r.g_l2, r.val_rmse));
    }
    out
}

pub fn write_log(history: &[EpochRecord], path: &Path) -> Result<()> {
    std::fs::write(path, log_csv(history)).map_err(|e| Error::io(path, e))
}

/// One scene prepared for a stage: its fixed inputs and normalized target.
struct Prepared<'a, T> {
    entry: &'a SceneEntry,
    /// Whole stack for prediction; unused for correction.
    fixed: Vec<T>,
    p_pre: Option<RadioMap<f64>>,
    target: Vec<T>,
}

struct StageInputs<'a> {
    setup: &'a StageSetup,
}

impl StageInputs<'_> {
    fn prepare<'e, T: Scalar>(
        &self,
        entries: &[&'e SceneEntry],
        prior: Option<&mut Model<T>>,
    ) -> Result<Vec<Prepared<'e, T>>> {
        let s = self.setup;
        let p_pre = match prior {
            Some(model) => {
                model.predict(&entries.iter().map(|e| &e.scene).collect::<Vec<_>>())?.into_iter().map(Some).collect()
            }
            None => vec![None; entries.len()],
        };
        entries
            .iter()
            .zip(p_pre)
            .map(|(e, p_pre)| {
                check_grid(e, s.generator.image_size)?;
                let fixed = match s.train.stage {
                    Stage::Predict => stack_values(&prediction_stack(&e.scene, &s.range)?, &s.train.masked),
                    Stage::Correct => Vec::new(),
                };
                Ok(Prepared { entry: e, fixed, p_pre, target: map_values(e.scene.ground_truth()?, &s.range) })
            })
            .collect()
    }

    /// Network input for one scene in a given measurement round.
    fn inputs<T: Scalar>(&self, p: &Prepared<'_, T>, stream: u64, round: u64) -> Result<Vec<T>> {
        let s = self.setup;
        match s.train.stage {
            Stage::Predict => Ok(p.fixed.clone()),
            Stage::Correct => {
                let seed = measurement_seed(derive_seed(s.train.seed, stream), &p.entry.id, round);
                let m = sample_measurements(&p.entry.scene, s.train.measurement_count, seed)?;
                let p_pre = p.p_pre.as_ref().expect("correction scenes carry a prediction");
                Ok(stack_values(&correction_stack(p_pre, &m, &s.rbf, &s.range)?, &s.train.masked))
            }
        }
    }
}

pub(crate) fn check_grid(e: &SceneEntry, side: usize) -> Result<()> {
    let g = e.scene.grid;
    if g.width_px != side || g.height_px != side {
        return Err(fptc_core::Error::validation(format!(
            "scene `{}` is {}x{}, network expects {side}x{side}",
            e.id, g.width_px, g.height_px
        ))
        .into());
    }
    Ok(())
}

/// Mean per-scene RMSE in dB of the generator in eval mode.
fn validation_rmse<T: Scalar>(
    gen: &mut Generator<T>,
    inputs: &StageInputs<'_>,
    val: &[Prepared<'_, T>],
) -> Result<f64> {
    if val.is_empty() {
        return Ok(f64::NAN);
    }
    let s = inputs.setup;
    let (c, side) = (s.generator.in_channels, s.generator.image_size);
    let mut total = 0.0;
    for chunk in val.chunks(INFER_BATCH) {
        let xs = chunk.iter().map(|p| inputs.inputs(p, VAL_MEASUREMENTS, 0)).collect::<Result<Vec<_>>>()?;
        let x = batch_tensor(&xs.iter().map(Vec::as_slice).collect::<Vec<_>>(), c, side);
        let y = gen.forward(&x, &mut Ctx::eval());
        for (i, p) in chunk.iter().enumerate() {
            let map = output_map(&y, i, p.entry.scene.grid, &s.range)?;
            total += rmse(p.entry.scene.ground_truth()?, &map)?;
        }
    }
    Ok(total / val.len() as f64)
}

/// Trains one stage and returns the best-validation checkpoint.
///
/// The correction stage requires `prior`, the trained prediction checkpoint,
/// which produces the coarse maps it learns to correct.
pub fn train_stage<T: Scalar>(
    setup: &StageSetup,
    train: &[&SceneEntry],
    val: &[&SceneEntry],
    prior: Option<&Checkpoint>,
) -> Result<TrainOutcome> {
    let cfg = &setup.train;
    cfg.validate()?;
    setup.range.validate()?;
    if setup.generator.in_channels != cfg.stage.in_channels() {
        return Err(Error::config("stage", "generator input channels do not match the stage"));
    }
    if train.is_empty() {
        return Err(fptc_core::Error::validation("training split is empty").into());
    }
    let mut prior_model = match (cfg.stage, prior) {
        (Stage::Predict, _) => None,
        (Stage::Correct, None) => {
            return Err(Error::config("rmp_checkpoint", "the correction stage needs a trained prediction checkpoint"))
        }
        (Stage::Correct, Some(ckpt)) => {
            if ckpt.stage() != Stage::Predict {
                return Err(Error::config("rmp_checkpoint", "prior checkpoint is not a prediction stage"));
            }
            Some(Model::<T>::from_checkpoint(ckpt)?)
        }
    };

    let inputs = StageInputs { setup };
    let train_set = inputs.prepare::<T>(train, prior_model.as_mut())?;
    let val_set = inputs.prepare::<T>(val, prior_model.as_mut())?;
    drop(prior_model);

    let mut gen = Generator::<T>::new(setup.generator.clone(), derive_seed(cfg.seed, GENERATOR_INIT))?;
    let mut disc = Discriminator::<T>::new(setup.discriminator.clone(), derive_seed(cfg.seed, DISCRIMINATOR_INIT))?;
    let adam =
        AdamConfig { learning_rate: cfg.learning_rate, beta1: cfg.beta1, beta2: cfg.beta2, ..AdamConfig::default() };
    let (mut opt_g, mut opt_d) = (Adam::new(adam), Adam::new(adam));
    let mut ctx = Ctx::train(derive_seed(cfg.seed, DROPOUT));
    let mut shuffle = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, SHUFFLE));
    let lambda = T::lit(cfg.lambda_l2);
    let (c, side) = (setup.generator.in_channels, setup.generator.image_size);

    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut steps = Vec::new();
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(f64, usize, Vec<f64>, Vec<f64>)> = None;

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut shuffle);
        let mut sums = [0.0f64; 3];
        let mut n_steps = 0usize;
        for (step, batch) in order.chunks(cfg.batch_size).enumerate() {
            let xs = batch
                .iter()
                .map(|&i| inputs.inputs(&train_set[i], TRAIN_MEASUREMENTS, epoch as u64))
                .collect::<Result<Vec<_>>>()?;
            let x = batch_tensor(&xs.iter().map(Vec::as_slice).collect::<Vec<_>>(), c, side);
            let targets: Vec<&[T]> = batch.iter().map(|&i| train_set[i].target.as_slice()).collect();
            let y = batch_tensor(&targets, 1, side);

            let fake = gen.forward(&x, &mut ctx);

            zero_grads(disc.params_mut());
            let real_logits = disc.logits(&x, &y, &mut ctx)?;
            let (loss_real, grad_real) = bce_with_logits(&real_logits, true);
            disc.backward_logits(&grad_real);
            let fake_logits = disc.logits(&x, &fake, &mut ctx)?;
            let (loss_fake, grad_fake) = bce_with_logits(&fake_logits, false);
            disc.backward_logits(&grad_fake);
            opt_d.step(disc.params_mut());

            zero_grads(gen.params_mut());
            zero_grads(disc.params_mut());
            let logits = disc.logits(&x, &fake, &mut ctx)?;
            let (g_adv, dlogits) = generator_adversarial(&logits);
            let mut grad = disc.backward_logits(&dlogits);
            let g_l2 = reconstruction_loss(&y, &fake)?;
            grad.add_assign(&reconstruction_grad(&y, &fake).map(|g| g * lambda));
            gen.backward(&grad);
            opt_g.step(gen.params_mut());

            let rec = StepRecord {
                epoch,
                step,
                d_loss: (loss_real + loss_fake).as_f64(),
                g_adv: g_adv.as_f64(),
                g_l2: g_l2.as_f64(),
            };
            sums[0] += rec.d_loss;
            sums[1] += rec.g_adv;
            sums[2] += rec.g_l2;
            n_steps += 1;
            steps.push(rec);
        }
        let val_rmse = validation_rmse(&mut gen, &inputs, &val_set)?;
        let n = n_steps as f64;
        let record = EpochRecord { epoch, d_loss: sums[0] / n, g_adv: sums[1] / n, g_l2: sums[2] / n, val_rmse };
        log::info!(
            "{} epoch {epoch}: d_loss {:.4} g_adv {:.4} g_l2 {:.6} val_rmse {:.4}",
            cfg.stage.name(),
            record.d_loss,
            record.g_adv,
            record.g_l2,
            val_rmse
        );
        history.push(record);
        // Without validation scenes the last epoch wins.
        let improves = match &best {
            None => true,
            Some((b, ..)) => val_rmse < *b || val_rmse.is_nan(),
        };
        if improves {
            best = Some((val_rmse, epoch, export_state(&gen.params()), export_state(&disc.params())));
        }
    }

    let (_, epoch, generator_state, discriminator_state) = best.expect("at least one epoch");
    let header = CheckpointHeader {
        stage: cfg.stage,
        generator_fingerprint: setup.generator.fingerprint(),
        discriminator_fingerprint: setup.discriminator.fingerprint(),
        generator: setup.generator.clone(),
        discriminator: setup.discriminator.clone(),
        train: cfg.clone(),
        range: setup.range,
        rbf: setup.rbf,
        epoch,
        history,
        prior: prior.map(Checkpoint::content_fingerprint),
    };
    Ok(TrainOutcome { checkpoint: Checkpoint { header, generator_state, discriminator_state }, steps })
}

/// Generator output tensor for already-assembled inputs, in eval mode.
pub(crate) fn run_generator<T: Scalar>(
    gen: &mut Generator<T>,
    inputs: &[Vec<T>],
    channels: usize,
    side: usize,
) -> Tensor<T> {
    let x = batch_tensor(&inputs.iter().map(Vec::as_slice).collect::<Vec<_>>(), channels, side);
    gen.forward(&x, &mut Ctx::eval())
}

/// Trains the prediction stage on the prediction training and validation splits.
pub fn train_rmp<T: Scalar>(
    cfg: &RunConfig,
    data: &Dataset,
    splits: &DatasetSplits,
    masked: &[FeatureKind],
) -> Result<TrainOutcome> {
    let mut setup = cfg.stage_setup(Stage::Predict);
    setup.train.masked = masked.to_vec();
    train_stage::<T>(&setup, &data.select(&splits.train_predict)?, &data.select(&splits.val_predict)?, None)
}

/// Trains the correction stage on the correction splits against a trained prediction stage.
pub fn train_rmc<T: Scalar>(
    cfg: &RunConfig,
    data: &Dataset,
    splits: &DatasetSplits,
    prior: &Checkpoint,
    masked: &[FeatureKind],
) -> Result<TrainOutcome> {
    let mut setup = cfg.stage_setup(Stage::Correct);
    setup.train.masked = masked.to_vec();
    train_stage::<T>(&setup, &data.select(&splits.train_correct)?, &data.select(&splits.val_correct)?, Some(prior))
}
