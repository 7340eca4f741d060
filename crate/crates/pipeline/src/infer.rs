//! Inference with a trained stage.

use fptc_core::{
    FeatureKind, GridSpec, InputStack, MeasurementSet, NormalizationRange, RadioMap, RbfConfig, Scene, Stage,
};
use fptc_nn::{import_state, Generator, Layer, Scalar};

use crate::checkpoint::Checkpoint;
use crate::dataset::{correction_stack, output_map, prediction_stack, stack_values};
use crate::error::{Error, Result};
use crate::train::{run_generator, INFER_BATCH};

/// Generator of one stage restored from a checkpoint, in eval mode.
pub struct Model<T: Scalar> {
    stage: Stage,
    generator: Generator<T>,
    range: NormalizationRange<f64>,
    rbf: RbfConfig<f64>,
    masked: Vec<FeatureKind>,
}

impl<T: Scalar> Model<T> {
    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        let h = &ckpt.header;
        let mut generator = Generator::<T>::new(h.generator.clone(), 0)?;
        import_state(generator.params_mut(), &ckpt.generator_state)?;
        Ok(Self { stage: h.stage, generator, range: h.range, rbf: h.rbf, masked: h.train.masked.clone() })
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn range(&self) -> &NormalizationRange<f64> {
        &self.range
    }

    pub fn rbf(&self) -> &RbfConfig<f64> {
        &self.rbf
    }

    fn expect_stage(&self, stage: Stage) -> Result<()> {
        if self.stage != stage {
            return Err(Error::config(
                "stage",
                format!("checkpoint is a {} stage, {} required", self.stage.name(), stage.name()),
            ));
        }
        Ok(())
    }

    fn check_grid(&self, grid: &GridSpec<f64>) -> Result<()> {
        let side = self.generator.spec().image_size;
        if grid.width_px != side || grid.height_px != side {
            return Err(fptc_core::Error::validation(format!(
                "input is {}x{}, network expects {side}x{side}",
                grid.width_px, grid.height_px
            ))
            .into());
        }
        Ok(())
    }

    /// Runs the generator over assembled stacks; masked channels are zeroed.
    pub fn run(&mut self, stacks: &[(GridSpec<f64>, InputStack<f64>)]) -> Result<Vec<RadioMap<f64>>> {
        let spec = self.generator.spec();
        let (c, side) = (spec.in_channels, spec.image_size);
        let mut out = Vec::with_capacity(stacks.len());
        for chunk in stacks.chunks(INFER_BATCH) {
            for (grid, _) in chunk {
                self.check_grid(grid)?;
            }
            let xs: Vec<Vec<T>> = chunk.iter().map(|(_, s)| stack_values(s, &self.masked)).collect();
            let y = run_generator(&mut self.generator, &xs, c, side);
            for (i, (grid, _)) in chunk.iter().enumerate() {
                out.push(output_map(&y, i, *grid, &self.range)?);
            }
        }
        Ok(out)
    }

    /// Coarse maps for each scene.
    pub fn predict(&mut self, scenes: &[&Scene<f64>]) -> Result<Vec<RadioMap<f64>>> {
        self.expect_stage(Stage::Predict)?;
        let stacks =
            scenes.iter().map(|s| Ok((s.grid, prediction_stack(s, &self.range)?))).collect::<Result<Vec<_>>>()?;
        self.run(&stacks)
    }

    /// Corrected maps for each coarse map and its measurements.
    pub fn correct(&mut self, inputs: &[(&RadioMap<f64>, &MeasurementSet<f64>)]) -> Result<Vec<RadioMap<f64>>> {
        self.expect_stage(Stage::Correct)?;
        let stacks = inputs
            .iter()
            .map(|(p, m)| Ok((p.grid, correction_stack(p, m, &self.rbf, &self.range)?)))
            .collect::<Result<Vec<_>>>()?;
        self.run(&stacks)
    }
}

/// Coarse radio map of one scene.
pub fn predict_radio_map<T: Scalar>(model: &mut Model<T>, scene: &Scene<f64>) -> Result<RadioMap<f64>> {
    Ok(model.predict(&[scene])?.remove(0))
}

/// Corrected radio map from a coarse map and sparse measurements.
pub fn correct_radio_map<T: Scalar>(
    model: &mut Model<T>,
    p_pre: &RadioMap<f64>,
    m: &MeasurementSet<f64>,
) -> Result<RadioMap<f64>> {
    Ok(model.correct(&[(p_pre, m)])?.remove(0))
}
