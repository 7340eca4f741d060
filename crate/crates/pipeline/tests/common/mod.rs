#![allow(dead_code)]

use fptc_pipeline::config::RunConfig;
use fptc_pipeline::dataset::Dataset;

/// Small networks on 32x32 scenes, quick enough for unit-level training runs.
pub fn tiny_config(seed: u64) -> RunConfig {
    let mut cfg = RunConfig::default();
    for (k, v) in [
        ("grid_size", "32"),
        ("net_levels", "3"),
        ("net_base_channels", "4"),
        ("net_max_channels", "16"),
        ("net_sa_resolutions", "8"),
        ("net_rc_blocks", "1"),
        ("disc_levels", "2"),
        ("disc_base_channels", "4"),
        ("rmp_epochs", "2"),
        ("rmc_epochs", "2"),
        ("rmp_batch_size", "4"),
        ("rmc_batch_size", "4"),
        ("measurement_count", "20"),
        ("synth_buildings_min", "2"),
        ("synth_buildings_max", "5"),
        ("eval_timing", "false"),
    ] {
        cfg.set(k, v).unwrap();
    }
    cfg.seed = seed;
    cfg.validate().unwrap();
    cfg
}

pub fn tiny_dataset(cfg: &RunConfig, count: usize) -> Dataset {
    Dataset::synthesize(cfg, count).unwrap()
}
