//! Scene collections, split resolution and conversion between scenes and network tensors.

use std::path::Path;

use fptc_core::features::{
    assemble_input_stack, empirical_radio_map, los_indicator_map, measurement_map, obstacle_topview_map,
    rbf_interpolate, transmitter_position_map,
};
use fptc_core::io::{list_scene_dirs, load_scene, save_scene};
use fptc_core::split::split_dataset;
use fptc_core::synth::generate_labeled_scene;
use fptc_core::{
    derive_seed, DatasetSplits, FeatureKind, FeatureMap, Grid2, GridSpec, InputStack, MeasurementSet,
    NormalizationRange, RadioMap, RbfConfig, Scene, Stage,
};
use fptc_nn::{Scalar, Tensor};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SceneEntry {
    pub id: String,
    pub scene: Scene<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub entries: Vec<SceneEntry>,
}

impl Dataset {
    /// Loads every scene directory under `dir`; ids are directory names.
    pub fn load(dir: &Path) -> Result<Self> {
        let mut entries = Vec::new();
        for path in list_scene_dirs(dir)? {
            let id = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            entries.push(SceneEntry { id, scene: load_scene(&path)? });
        }
        if entries.is_empty() {
            return Err(
                fptc_core::Error::Ingest { path: dir.to_path_buf(), reason: "no scene directories".into() }.into()
            );
        }
        Ok(Self { entries })
    }

    /// `count` synthetic scenes with oracle ground truth, ids `scene_0000`, ...
    pub fn synthesize(cfg: &RunConfig, count: usize) -> Result<Self> {
        let grid = cfg.grid_spec();
        let synth = cfg.synth_params();
        let oracle = cfg.oracle_params();
        let entries = (0..count)
            .map(|i| {
                let scene = generate_labeled_scene(grid, &synth, &oracle, derive_seed(cfg.seed, i as u64))?;
                Ok(SceneEntry { id: format!("scene_{i:04}"), scene })
            })
            .collect::<Result<_>>()?;
        Ok(Self { entries })
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        for e in &self.entries {
            save_scene(&e.scene, &dir.join(&e.id))?;
        }
        Ok(())
    }

    pub fn ids(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.id.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries for `ids`, in that order.
    pub fn select(&self, ids: &[String]) -> Result<Vec<&SceneEntry>> {
        ids.iter()
            .map(|id| {
                self.entries
                    .iter()
                    .find(|e| &e.id == id)
                    .ok_or_else(|| fptc_core::Error::validation(format!("scene `{id}` is not in the dataset")).into())
            })
            .collect()
    }
}

/// Splits from `cfg.splits_file` when set, otherwise a fresh seeded split of the dataset ids.
pub fn resolve_splits(cfg: &RunConfig, data: &Dataset) -> Result<DatasetSplits> {
    match &cfg.splits_file {
        Some(path) => load_splits(path),
        None => Ok(split_dataset(&data.ids(), cfg.seed)?),
    }
}

pub fn save_splits(splits: &DatasetSplits, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let json = serde_json::to_string_pretty(splits).expect("splits serialize");
    std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
}

pub fn load_splits(path: &Path) -> Result<DatasetSplits> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::config("splits_file", format!("{}: {e}", path.display())))
}

/// Stable 64-bit key of a scene id, used to derive per-scene seeds.
pub fn scene_key(id: &str) -> u64 {
    let digest = Sha256::digest(id.as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// Seed of the measurement draw for one scene in one round (epoch or evaluation pass).
pub fn measurement_seed(base: u64, id: &str, round: u64) -> u64 {
    derive_seed(derive_seed(base, scene_key(id)), round)
}

/// `[TP, OT, ER, LN]` for one scene.
pub fn prediction_stack(scene: &Scene<f64>, range: &NormalizationRange<f64>) -> Result<InputStack<f64>> {
    Ok(assemble_input_stack(
        Stage::Predict,
        vec![
            transmitter_position_map(scene),
            obstacle_topview_map(scene),
            empirical_radio_map(scene, range),
            los_indicator_map(scene),
        ],
    )?)
}

/// `[SM, IP, PRE]` from a coarse prediction and a measurement set.
pub fn correction_stack(
    p_pre: &RadioMap<f64>,
    m: &MeasurementSet<f64>,
    rbf: &RbfConfig<f64>,
    range: &NormalizationRange<f64>,
) -> Result<InputStack<f64>> {
    let grid = p_pre.grid;
    Ok(assemble_input_stack(
        Stage::Correct,
        vec![
            measurement_map(m, &grid, range)?,
            rbf_interpolate(m, &grid, rbf, range)?,
            FeatureMap::from_prediction(p_pre, range),
        ],
    )?)
}

/// Flattened `C x H x W` channel data of a stack, with `masked` channels zeroed.
pub fn stack_values<T: Scalar>(stack: &InputStack<f64>, masked: &[FeatureKind]) -> Vec<T> {
    let mut out = Vec::with_capacity(stack.channels.len() * stack.width() * stack.height());
    for ch in &stack.channels {
        if masked.contains(&ch.kind) {
            out.extend(std::iter::repeat_n(T::zero(), ch.values.as_slice().len()));
        } else {
            out.extend(ch.values.as_slice().iter().map(|v| T::lit(*v)));
        }
    }
    out
}

/// Normalized single-channel values of a radio map.
pub fn map_values<T: Scalar>(map: &RadioMap<f64>, range: &NormalizationRange<f64>) -> Vec<T> {
    map.values_dbm.as_slice().iter().map(|v| T::lit(range.forward(*v))).collect()
}

/// Stacks per-sample `C x H x W` blocks into one batch tensor.
pub fn batch_tensor<T: Scalar>(samples: &[&[T]], channels: usize, side: usize) -> Tensor<T> {
    let mut data = Vec::with_capacity(samples.len() * channels * side * side);
    for s in samples {
        assert_eq!(s.len(), channels * side * side, "sample size");
        data.extend_from_slice(s);
    }
    Tensor::from_vec([samples.len(), channels, side, side], data).expect("consistent batch")
}

/// Denormalizes sample `i` of a `[n, 1, H, W]` generator output into dBm.
pub fn output_map<T: Scalar>(
    out: &Tensor<T>,
    i: usize,
    grid: GridSpec<f64>,
    range: &NormalizationRange<f64>,
) -> Result<RadioMap<f64>> {
    let values = out.sample(i).iter().map(|v| range.inverse(v.as_f64())).collect();
    Ok(RadioMap::new(grid, Grid2::from_vec(grid.width_px, grid.height_px, values)?)?)
}
