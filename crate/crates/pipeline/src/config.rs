//! Flat `key = value` run configuration.
//!
//! Lines starting with `#` and blank lines are ignored. Every key has a
//! default, so an empty file is a valid configuration. Unknown keys and
//! unparsable values are rejected with the offending key named.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use fptc_core::{GridSpec, NormalizationRange, OracleParams, RbfConfig, RbfKernel, ShapeParam, Stage, SynthParams};
use fptc_nn::{DiscriminatorSpec, GeneratorSpec};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::train::TrainConfig;

/// Environment variable consulted for the seed when the config does not set one.
pub const SEED_ENV: &str = "FPTC_SEED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub levels: usize,
    pub base_channels: usize,
    pub max_channels: usize,
    /// Feature-map sides that get self-attention; empty means a quarter of the grid side.
    pub sa_resolutions: Vec<usize>,
    pub rc_blocks: usize,
    pub dropout: f64,
    pub leaky_slope: f64,
    pub disc_levels: usize,
    pub disc_base_channels: usize,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            levels: 6,
            base_channels: 64,
            max_channels: 384,
            sa_resolutions: Vec::new(),
            rc_blocks: 2,
            dropout: 0.5,
            leaky_slope: 0.2,
            disc_levels: 4,
            disc_base_channels: 64,
        }
    }
}

/// Optimizer and schedule for one stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTraining {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub lambda_l2: f64,
}

impl Default for StageTraining {
    fn default() -> Self {
        Self { learning_rate: 2e-4, beta1: 0.5, beta2: 0.999, batch_size: 8, epochs: 100, lambda_l2: 100.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub dataset_dir: Option<PathBuf>,
    pub splits_file: Option<PathBuf>,
    pub grid_size: usize,
    pub cell_size_m: f64,
    pub range: NormalizationRange<f64>,
    pub rbf: RbfConfig<f64>,
    pub synth: SynthParams<f64>,
    pub oracle: OracleParams<f64>,
    pub network: NetworkConfig,
    pub rmp: StageTraining,
    pub rmc: StageTraining,
    pub measurement_count: usize,
    /// Record wall-clock inference time in metric reports; off gives byte-stable reports.
    pub eval_timing: bool,
    pub sweep_percentages: Vec<f64>,
    pub sweep_retrain: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            dataset_dir: None,
            splits_file: None,
            grid_size: 128,
            cell_size_m: 10.0,
            range: NormalizationRange::default(),
            rbf: RbfConfig::default(),
            synth: SynthParams::default(),
            oracle: OracleParams::default(),
            network: NetworkConfig::default(),
            rmp: StageTraining::default(),
            rmc: StageTraining::default(),
            measurement_count: 120,
            eval_timing: true,
            sweep_percentages: vec![0.25, 0.5, 0.73, 1.0, 2.0],
            sweep_retrain: true,
        }
    }
}

fn parse<V: FromStr>(key: &str, value: &str) -> Result<V> {
    value.parse().map_err(|_| Error::config(key, format!("cannot parse `{value}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::config(key, format!("expected a boolean, got `{value}`"))),
    }
}

fn parse_list<V: FromStr>(key: &str, value: &str) -> Result<Vec<V>> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| parse(key, s)).collect()
}

fn join<V: ToString>(values: &[V]) -> String {
    values.iter().map(V::to_string).collect::<Vec<_>>().join(",")
}

fn opt_path(value: &str) -> Option<PathBuf> {
    (!value.is_empty()).then(|| PathBuf::from(value))
}

fn show_path(p: &Option<PathBuf>) -> String {
    p.as_ref().map(|p| p.display().to_string()).unwrap_or_default()
}

impl RunConfig {
    /// Parses config text on top of the defaults. Returns the config and whether `seed` was set.
    pub fn parse_str(text: &str) -> Result<(Self, bool)> {
        let mut cfg = Self::default();
        let mut seed_set = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::config(line, format!("line {} is not `key = value`", lineno + 1)))?;
            let key = key.trim();
            seed_set |= key == "seed";
            cfg.set(key, value.trim())?;
        }
        Ok((cfg, seed_set))
    }

    /// Reads a config file, applies `overrides` in order, falls back to the
    /// seed environment variable, and validates the result.
    pub fn load(path: Option<&Path>, overrides: &[(String, String)], env_seed: Option<&str>) -> Result<Self> {
        let (mut cfg, mut seed_set) = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                Self::parse_str(&text)?
            }
            None => (Self::default(), false),
        };
        for (k, v) in overrides {
            seed_set |= k == "seed";
            cfg.set(k, v)?;
        }
        if !seed_set {
            if let Some(s) = env_seed {
                cfg.seed = parse(SEED_ENV, s.trim())?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value;
        match key {
            "seed" => self.seed = parse(key, v)?,
            "dataset_dir" => self.dataset_dir = opt_path(v),
            "splits_file" => self.splits_file = opt_path(v),
            "grid_size" => self.grid_size = parse(key, v)?,
            "cell_size_m" => self.cell_size_m = parse(key, v)?,
            "rsrp_min_dbm" => self.range.rsrp_min_dbm = parse(key, v)?,
            "rsrp_max_dbm" => self.range.rsrp_max_dbm = parse(key, v)?,
            "rbf_kernel" => {
                self.rbf.kernel =
                    RbfKernel::parse(v).ok_or_else(|| Error::config(key, format!("unknown kernel `{v}`")))?
            }
            "rbf_epsilon" => {
                self.rbf.shape_epsilon =
                    if v.eq_ignore_ascii_case("auto") { ShapeParam::Auto } else { ShapeParam::Explicit(parse(key, v)?) }
            }
            "rbf_ridge" => self.rbf.ridge = parse(key, v)?,
            "synth_buildings_min" => self.synth.n_buildings.lo = parse(key, v)?,
            "synth_buildings_max" => self.synth.n_buildings.hi = parse(key, v)?,
            "synth_footprint_min" => self.synth.footprint_px.lo = parse(key, v)?,
            "synth_footprint_max" => self.synth.footprint_px.hi = parse(key, v)?,
            "synth_height_min_m" => self.synth.height_m.lo = parse(key, v)?,
            "synth_height_max_m" => self.synth.height_m.hi = parse(key, v)?,
            "synth_tx_margin_px" => self.synth.tx_margin_px = parse(key, v)?,
            "synth_tx_height_min_m" => self.synth.tx_height_m.lo = parse(key, v)?,
            "synth_tx_height_max_m" => self.synth.tx_height_m.hi = parse(key, v)?,
            "synth_tx_power_dbm" => self.synth.tx_power_dbm = parse(key, v)?,
            "synth_freq_mhz" => self.synth.freq_mhz = parse(key, v)?,
            "synth_rx_height_m" => self.synth.rx_height_m = parse(key, v)?,
            "oracle_block_loss_db" => self.oracle.block_loss_db = parse(key, v)?,
            "oracle_block_cap" => self.oracle.block_cap = parse(key, v)?,
            "oracle_shadow_sigma_db" => self.oracle.shadow_sigma_db = parse(key, v)?,
            "oracle_shadow_smooth_px" => self.oracle.shadow_smooth_px = parse(key, v)?,
            "net_levels" => self.network.levels = parse(key, v)?,
            "net_base_channels" => self.network.base_channels = parse(key, v)?,
            "net_max_channels" => self.network.max_channels = parse(key, v)?,
            "net_sa_resolutions" => self.network.sa_resolutions = parse_list(key, v)?,
            "net_rc_blocks" => self.network.rc_blocks = parse(key, v)?,
            "net_dropout" => self.network.dropout = parse(key, v)?,
            "net_leaky_slope" => self.network.leaky_slope = parse(key, v)?,
            "disc_levels" => self.network.disc_levels = parse(key, v)?,
            "disc_base_channels" => self.network.disc_base_channels = parse(key, v)?,
            "measurement_count" => self.measurement_count = parse(key, v)?,
            "eval_timing" => self.eval_timing = parse_bool(key, v)?,
            "sweep_percentages" => self.sweep_percentages = parse_list(key, v)?,
            "sweep_retrain" => self.sweep_retrain = parse_bool(key, v)?,
            _ => {
                let (stage, field) = key
                    .split_once('_')
                    .filter(|(s, _)| *s == "rmp" || *s == "rmc")
                    .ok_or_else(|| Error::config(key, "unknown key"))?;
                let t = if stage == "rmp" { &mut self.rmp } else { &mut self.rmc };
                match field {
                    "learning_rate" => t.learning_rate = parse(key, v)?,
                    "beta1" => t.beta1 = parse(key, v)?,
                    "beta2" => t.beta2 = parse(key, v)?,
                    "batch_size" => t.batch_size = parse(key, v)?,
                    "epochs" => t.epochs = parse(key, v)?,
                    "lambda_l2" => t.lambda_l2 = parse(key, v)?,
                    _ => return Err(Error::config(key, "unknown key")),
                }
            }
        }
        Ok(())
    }

    /// Every key with its current value, in a fixed order.
    pub fn entries(&self) -> Vec<(String, String)> {
        let out: Vec<(&str, String)> = vec![
            ("seed", self.seed.to_string()),
            ("dataset_dir", show_path(&self.dataset_dir)),
            ("splits_file", show_path(&self.splits_file)),
            ("grid_size", self.grid_size.to_string()),
            ("cell_size_m", self.cell_size_m.to_string()),
            ("rsrp_min_dbm", self.range.rsrp_min_dbm.to_string()),
            ("rsrp_max_dbm", self.range.rsrp_max_dbm.to_string()),
            ("rbf_kernel", self.rbf.kernel.name().to_string()),
            (
                "rbf_epsilon",
                match self.rbf.shape_epsilon {
                    ShapeParam::Auto => "auto".to_string(),
                    ShapeParam::Explicit(e) => e.to_string(),
                },
            ),
            ("rbf_ridge", self.rbf.ridge.to_string()),
            ("synth_buildings_min", self.synth.n_buildings.lo.to_string()),
            ("synth_buildings_max", self.synth.n_buildings.hi.to_string()),
            ("synth_footprint_min", self.synth.footprint_px.lo.to_string()),
            ("synth_footprint_max", self.synth.footprint_px.hi.to_string()),
            ("synth_height_min_m", self.synth.height_m.lo.to_string()),
            ("synth_height_max_m", self.synth.height_m.hi.to_string()),
            ("synth_tx_margin_px", self.synth.tx_margin_px.to_string()),
            ("synth_tx_height_min_m", self.synth.tx_height_m.lo.to_string()),
            ("synth_tx_height_max_m", self.synth.tx_height_m.hi.to_string()),
            ("synth_tx_power_dbm", self.synth.tx_power_dbm.to_string()),
            ("synth_freq_mhz", self.synth.freq_mhz.to_string()),
            ("synth_rx_height_m", self.synth.rx_height_m.to_string()),
            ("oracle_block_loss_db", self.oracle.block_loss_db.to_string()),
            ("oracle_block_cap", self.oracle.block_cap.to_string()),
            ("oracle_shadow_sigma_db", self.oracle.shadow_sigma_db.to_string()),
            ("oracle_shadow_smooth_px", self.oracle.shadow_smooth_px.to_string()),
            ("net_levels", self.network.levels.to_string()),
            ("net_base_channels", self.network.base_channels.to_string()),
            ("net_max_channels", self.network.max_channels.to_string()),
            ("net_sa_resolutions", join(&self.network.sa_resolutions)),
            ("net_rc_blocks", self.network.rc_blocks.to_string()),
            ("net_dropout", self.network.dropout.to_string()),
            ("net_leaky_slope", self.network.leaky_slope.to_string()),
            ("disc_levels", self.network.disc_levels.to_string()),
            ("disc_base_channels", self.network.disc_base_channels.to_string()),
        ];
        let mut out: Vec<(String, String)> = out.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        for (stage, t) in [("rmp", &self.rmp), ("rmc", &self.rmc)] {
            for (field, value) in [
                ("learning_rate", t.learning_rate.to_string()),
                ("beta1", t.beta1.to_string()),
                ("beta2", t.beta2.to_string()),
                ("batch_size", t.batch_size.to_string()),
                ("epochs", t.epochs.to_string()),
                ("lambda_l2", t.lambda_l2.to_string()),
            ] {
                out.push((format!("{stage}_{field}"), value));
            }
        }
        for (k, v) in [
            ("measurement_count", self.measurement_count.to_string()),
            ("eval_timing", self.eval_timing.to_string()),
            ("sweep_percentages", join(&self.sweep_percentages)),
            ("sweep_retrain", self.sweep_retrain.to_string()),
        ] {
            out.push((k.to_string(), v));
        }
        out
    }

    /// Config text that parses back to `self`.
    pub fn to_text(&self) -> String {
        self.entries().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let wrap = |key: &str, r: fptc_core::Result<()>| r.map_err(|e| Error::config(key, e.to_string()));
        wrap("grid_size", GridSpec::new(self.grid_size, self.grid_size, self.cell_size_m).map(|_| ()))?;
        wrap("rsrp_min_dbm", self.range.validate())?;
        wrap("rbf_epsilon", self.rbf.validate())?;
        wrap("synth", self.synth_params().validate(&self.grid_spec()))?;
        wrap("oracle", self.oracle.validate())?;
        for stage in [Stage::Predict, Stage::Correct] {
            let key = if stage == Stage::Predict { "net_levels" } else { "net_rc_blocks" };
            self.generator_spec(stage).validate().map_err(|e| Error::config(key, e.to_string()))?;
            self.discriminator_spec(stage).validate().map_err(|e| Error::config("disc_levels", e.to_string()))?;
            self.train_config(stage).validate()?;
        }
        if self.measurement_count == 0 {
            return Err(Error::config("measurement_count", "must be positive"));
        }
        if let Some(p) = self.sweep_percentages.iter().find(|p| !(**p > 0.0 && **p <= 100.0)) {
            return Err(Error::config("sweep_percentages", format!("{p} is not in (0, 100]")));
        }
        for (key, path) in [("dataset_dir", &self.dataset_dir), ("splits_file", &self.splits_file)] {
            if let Some(p) = path.as_ref().filter(|p| !p.exists()) {
                return Err(Error::config(key, format!("{} does not exist", p.display())));
            }
        }
        Ok(())
    }

    pub fn grid_spec(&self) -> GridSpec<f64> {
        GridSpec { width_px: self.grid_size, height_px: self.grid_size, cell_size_m: self.cell_size_m }
    }

    pub fn synth_params(&self) -> SynthParams<f64> {
        SynthParams { cell_size_m: self.cell_size_m, seed: self.seed, ..self.synth.clone() }
    }

    pub fn oracle_params(&self) -> OracleParams<f64> {
        OracleParams { seed: self.seed, ..self.oracle.clone() }
    }

    pub fn generator_spec(&self, stage: Stage) -> GeneratorSpec {
        let n = &self.network;
        let sa = if n.sa_resolutions.is_empty() { vec![self.grid_size / 4] } else { n.sa_resolutions.clone() };
        GeneratorSpec {
            in_channels: stage.in_channels(),
            levels: n.levels,
            base_channels: n.base_channels,
            max_channels: n.max_channels,
            image_size: self.grid_size,
            sa_resolutions: if stage == Stage::Predict { sa } else { Vec::new() },
            rc_block_count: if stage == Stage::Correct { n.rc_blocks } else { 0 },
            dropout_rate: n.dropout,
            leaky_slope: n.leaky_slope,
        }
    }

    pub fn discriminator_spec(&self, stage: Stage) -> DiscriminatorSpec {
        let n = &self.network;
        DiscriminatorSpec {
            in_channels: stage.in_channels() + 1,
            levels: n.disc_levels,
            base_channels: n.disc_base_channels,
            max_channels: n.max_channels,
            image_size: self.grid_size,
            leaky_slope: n.leaky_slope,
        }
    }

    pub fn train_config(&self, stage: Stage) -> TrainConfig {
        let t = if stage == Stage::Predict { &self.rmp } else { &self.rmc };
        TrainConfig {
            stage,
            learning_rate: t.learning_rate,
            beta1: t.beta1,
            beta2: t.beta2,
            batch_size: t.batch_size,
            epochs: t.epochs,
            lambda_l2: t.lambda_l2,
            seed: self.seed,
            measurement_count: self.measurement_count,
            masked: Vec::new(),
        }
    }

    /// Everything needed to train one stage.
    pub fn stage_setup(&self, stage: Stage) -> StageSetup {
        StageSetup {
            generator: self.generator_spec(stage),
            discriminator: self.discriminator_spec(stage),
            train: self.train_config(stage),
            range: self.range,
            rbf: self.rbf,
        }
    }
}

/// Network specs, training settings, normalization and interpolation for one stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSetup {
    pub generator: GeneratorSpec,
    pub discriminator: DiscriminatorSpec,
    pub train: TrainConfig,
    pub range: NormalizationRange<f64>,
    pub rbf: RbfConfig<f64>,
}
