//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero when any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use fptc_core::features::{cost231_pathloss, los_indicator_map, rbf_interpolate_dbm};
use fptc_core::metrics::{mae, psnr, rmse, ssim};
use fptc_core::split::split_dataset;
use fptc_core::synth::generate_scene;
use fptc_core::{
    DatasetSplits, FeatureKind, Grid2, GridSpec, Measurement, MeasurementSet, NormalizationRange, RadioMap, RbfConfig,
    RbfKernel, Scene, ShapeParam, Stage, SynthParams,
};
use fptc_nn::{Ctx, Discriminator, Generator, Layer, ResidualBlock, SelfAttention, Tensor64};
use fptc_pipeline::ablation::{ablation_suite, AblationPlan};
use fptc_pipeline::config::RunConfig;
use fptc_pipeline::dataset::Dataset;
use fptc_pipeline::eval::{evaluate_split, EvalOptions, EvalReport};
use fptc_pipeline::infer::Model;
use fptc_pipeline::sweep::{density_sweep, measurement_count_for};
use fptc_pipeline::train::{log_csv, train_rmc, train_rmp};
use fptc_pipeline::Checkpoint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// ---------------------------------------------------------------- 1

/// Natural-log form of the urban path-loss formula, with the constants
/// regrouped so it shares no arithmetic path with the library.
fn pathloss_oracle(f: f64, hb: f64, hr: f64, d: f64) -> f64 {
    let lg = |v: f64| v.ln() / std::f64::consts::LN_10;
    let a_hr = 3.2 * lg(11.75 * hr).powi(2) - 4.97;
    let slope = 44.9 - 6.55 * lg(hb);
    49.3 + 33.9 * lg(f) - 13.82 * lg(hb) - a_hr + slope * lg(d)
}

fn criterion_1() -> Outcome {
    let mut worst = 0.0f64;
    let mut points = 0;
    for f in [1500.0, 1625.0, 1750.0, 1875.0, 2000.0] {
        for hb in [30.0, 50.0, 80.0, 120.0, 200.0] {
            for hr in [1.0, 1.5, 5.0, 10.0] {
                for d in [0.05, 0.2, 0.5, 1.0, 5.0, 20.0] {
                    let got = cost231_pathloss(f, hb, hr, d).map_err(|e| e.to_string())?;
                    worst = worst.max((got - pathloss_oracle(f, hb, hr, d)).abs());
                    points += 1;
                }
            }
        }
    }
    let spot: f64 = cost231_pathloss(2000.0, 30.0, 1.5, 1.0).map_err(|e| e.to_string())?;
    check(
        points >= 500 && worst < 1e-9 && (spot - 140.792).abs() < 1e-3,
        format!("{points} points, max |diff| {worst:.2e} dB, PL(2000,30,1.5,1) = {spot:.4} dB"),
    )
}

// ---------------------------------------------------------------- 2

const SAMPLE_STEP_PX: f64 = 0.01;
const GRAZE_CHORD_PX: f64 = 0.02;

fn cell_of(p: (f64, f64)) -> (i64, i64) {
    ((p.0 + 0.5).floor() as i64, (p.1 + 0.5).floor() as i64)
}

/// Height of the straight 3-D link at parameter `t` from the transmitter.
fn link_height(t: f64, hb: f64, hr: f64) -> f64 {
    hb + t * (hr - hb)
}

/// Walks the link in steps of at most 0.01 px and reports whether any
/// obstacle cell other than the two endpoints reaches the link height.
fn sampled_los(scene: &Scene<f64>, rx: (usize, usize)) -> bool {
    let tx = (scene.tx.x_px as f64, scene.tx.y_px as f64);
    let rxf = (rx.0 as f64, rx.1 as f64);
    let len = ((rxf.0 - tx.0).powi(2) + (rxf.1 - tx.1).powi(2)).sqrt();
    if len == 0.0 {
        return true;
    }
    let (tc, rc) = (cell_of(tx), cell_of(rxf));
    let steps = (len / SAMPLE_STEP_PX).ceil() as usize;
    for k in 0..=steps {
        let t = k as f64 / steps as f64;
        let p = (tx.0 + t * (rxf.0 - tx.0), tx.1 + t * (rxf.1 - tx.1));
        let c = cell_of(p);
        if c == tc || c == rc {
            continue;
        }
        let h = scene.heights.get(c.0 as usize, c.1 as usize);
        if h > 0.0 && h >= link_height(t, scene.tx.h_b_m, scene.rx_height_m) {
            return false;
        }
    }
    true
}

/// Parameter interval of the link inside the closed square of cell `c`.
fn chord(tx: (f64, f64), rx: (f64, f64), c: (i64, i64)) -> Option<(f64, f64)> {
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for (p0, d, lo) in [(tx.0, rx.0 - tx.0, c.0 as f64 - 0.5), (tx.1, rx.1 - tx.1, c.1 as f64 - 0.5)] {
        let hi = lo + 1.0;
        if d == 0.0 {
            if p0 < lo || p0 > hi {
                return None;
            }
        } else {
            let (a, b) = ((lo - p0) / d, (hi - p0) / d);
            t0 = t0.max(a.min(b));
            t1 = t1.min(a.max(b));
        }
    }
    (t0 <= t1).then_some((t0, t1))
}

/// A link grazes an obstacle when it only clips a cell corner or edge, or
/// when the obstacle top lies inside the range of link heights over the cell.
fn grazes(scene: &Scene<f64>, rx: (usize, usize)) -> bool {
    let tx = (scene.tx.x_px as f64, scene.tx.y_px as f64);
    let rxf = (rx.0 as f64, rx.1 as f64);
    let len = ((rxf.0 - tx.0).powi(2) + (rxf.1 - tx.1).powi(2)).sqrt();
    let (tc, rc) = (cell_of(tx), cell_of(rxf));
    let (hb, hr) = (scene.tx.h_b_m, scene.rx_height_m);
    for y in 0..scene.grid.height_px as i64 {
        for x in 0..scene.grid.width_px as i64 {
            let h = scene.heights.get(x as usize, y as usize);
            if h <= 0.0 || (x, y) == tc || (x, y) == rc {
                continue;
            }
            let Some((t0, t1)) = chord(tx, rxf, (x, y)) else { continue };
            let (lo, hi) = (link_height(t1, hb, hr), link_height(t0, hb, hr));
            if (t1 - t0) * len < GRAZE_CHORD_PX || (h >= lo.min(hi) - 1e-9 && h <= lo.max(hi) + 1e-9) {
                return true;
            }
        }
    }
    false
}

fn criterion_2() -> Outcome {
    let grid = GridSpec::<f64>::square(32).map_err(|e| e.to_string())?;
    let (mut total, mut disagree, mut ungrazed) = (0usize, 0usize, 0usize);
    for seed in 0..50 {
        let scene = generate_scene(grid, &SynthParams { seed, ..SynthParams::default() }).map_err(|e| e.to_string())?;
        let map = los_indicator_map(&scene);
        for y in 0..32 {
            for x in 0..32 {
                total += 1;
                let los = map.values.get(x, y) == 1.0;
                if los != sampled_los(&scene, (x, y)) {
                    disagree += 1;
                    if !grazes(&scene, (x, y)) {
                        ungrazed += 1;
                    }
                }
            }
        }
    }
    let agreement = 1.0 - disagree as f64 / total as f64;
    check(
        agreement >= 0.995 && ungrazed == 0,
        format!(
            "agreement {:.4}% over {total} pixels, {disagree} disagreements, {ungrazed} not grazing",
            100.0 * agreement
        ),
    )
}

// ---------------------------------------------------------------- 3

fn criterion_3() -> Outcome {
    let grid = GridSpec::<f64>::square(128).map_err(|e| e.to_string())?;
    let cfg = RbfConfig { kernel: RbfKernel::Gaussian, shape_epsilon: ShapeParam::Auto, ridge: 0.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for n in [1usize, 10, 120] {
        let mut samples: Vec<Measurement<f64>> = Vec::with_capacity(n);
        while samples.len() < n {
            let (x, y) = (rng.random_range(0..128), rng.random_range(0..128));
            if samples.iter().all(|s| (s.x_px, s.y_px) != (x, y)) {
                samples.push(Measurement { x_px: x, y_px: y, rsrp_dbm: rng.random_range(-140.0..-50.0) });
            }
        }
        let m = MeasurementSet::new(samples);
        let out = rbf_interpolate_dbm(&m, &grid, &cfg).map_err(|e| e.to_string())?;
        for s in m.iter() {
            worst = worst.max((out.get(s.x_px, s.y_px) - s.rsrp_dbm).abs());
        }
    }

    let pair_grid = GridSpec::<f64>::square(5).map_err(|e| e.to_string())?;
    let pair_cfg = RbfConfig { kernel: RbfKernel::Gaussian, shape_epsilon: ShapeParam::Explicit(0.5), ridge: 0.0 };
    let mut pair_worst = 0.0f64;
    for v in [1.0, -80.0] {
        let m = MeasurementSet::new(vec![
            Measurement { x_px: 0, y_px: 0, rsrp_dbm: v },
            Measurement { x_px: 4, y_px: 0, rsrp_dbm: v },
        ]);
        let out = rbf_interpolate_dbm(&m, &pair_grid, &pair_cfg).map_err(|e| e.to_string())?;
        pair_worst = pair_worst.max((out.get(2, 0) / v - 0.72253).abs());
    }
    check(
        worst < 1e-6 && pair_worst < 1e-4,
        format!("max sample residual {worst:.2e} dBm for N in {{1,10,120}}, symmetric pair off by {pair_worst:.2e}"),
    )
}

// ---------------------------------------------------------------- 4

const FD_STEP: f64 = 1e-6;

fn weighted_sum<L: Layer<f64>>(layer: &mut L, x: &Tensor64, r: &Tensor64) -> f64 {
    layer.forward(x, &mut Ctx::eval()).data().iter().zip(r.data()).map(|(a, b)| a * b).sum()
}

fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm(&diff) / norm(a).max(norm(b)).max(1e-12)
}

/// Worst relative error between backprop and central differences over the
/// input and every trainable parameter.
fn gradient_error<L: Layer<f64>>(layer: &mut L, x: &Tensor64, rng: &mut ChaCha8Rng) -> f64 {
    let y = layer.forward(x, &mut Ctx::eval());
    let r = Tensor64::from_fn(y.shape(), |_| rng.random_range(-1.0..1.0));
    layer.params_mut().into_iter().for_each(|p| p.zero_grad());
    let dx = layer.backward(&r);

    let numeric: Vec<f64> = (0..x.len())
        .map(|i| {
            let (mut up, mut down) = (x.clone(), x.clone());
            up.data_mut()[i] += FD_STEP;
            down.data_mut()[i] -= FD_STEP;
            (weighted_sum(layer, &up, &r) - weighted_sum(layer, &down, &r)) / (2.0 * FD_STEP)
        })
        .collect();
    let mut worst = relative_error(dx.data(), &numeric);

    let grads: Vec<Option<Vec<f64>>> =
        layer.params().iter().map(|p| p.is_trainable().then(|| p.grad.clone())).collect();
    for (pi, analytic) in grads.into_iter().enumerate() {
        let Some(analytic) = analytic else { continue };
        let mut numeric = Vec::with_capacity(analytic.len());
        for j in 0..analytic.len() {
            let orig = layer.params()[pi].value[j];
            layer.params_mut()[pi].value[j] = orig + FD_STEP;
            let up = weighted_sum(layer, x, &r);
            layer.params_mut()[pi].value[j] = orig - FD_STEP;
            let down = weighted_sum(layer, x, &r);
            layer.params_mut()[pi].value[j] = orig;
            numeric.push((up - down) / (2.0 * FD_STEP));
        }
        worst = worst.max(relative_error(&analytic, &numeric));
    }
    worst
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let block = |rng: &mut ChaCha8Rng| Tensor64::from_fn([2, 2, 4, 4], |_| rng.random_range(-1.0..1.0));

    let mut sa = SelfAttention::<f64>::new(2, &mut rng);
    sa.set_gamma(0.0);
    let x = block(&mut rng);
    let identity = sa.forward(&x, &mut Ctx::eval()) == x;

    for p in sa.params_mut() {
        p.value.iter_mut().for_each(|v| *v *= 10.0);
    }
    sa.set_gamma(0.8);
    let x = block(&mut rng);
    let sa_err = gradient_error(&mut sa, &x, &mut rng);
    sa.forward(&x, &mut Ctx::eval());
    let row_err = sa
        .last_attention()
        .ok_or("no attention map cached")?
        .iter()
        .flat_map(|a| a.chunks(16).map(|row| (row.iter().sum::<f64>() - 1.0).abs()))
        .fold(0.0f64, f64::max);

    let mut rb = ResidualBlock::<f64>::new(2, &mut rng);
    let x = block(&mut rng);
    let rc_err = gradient_error(&mut rb, &x, &mut rng);

    check(
        identity && sa_err < 1e-4 && rc_err < 1e-4 && row_err < 1e-6,
        format!(
            "identity at gamma 0: {identity}, gradient rel. error SA {sa_err:.2e} RC {rc_err:.2e}, max |row sum - 1| {row_err:.2e}"
        ),
    )
}

// ---------------------------------------------------------------- 5

fn pixel_levels(map: &RadioMap<f64>, range: &NormalizationRange<f64>) -> Vec<f64> {
    let (lo, hi) = (range.rsrp_min_dbm, range.rsrp_max_dbm);
    map.values_dbm.as_slice().iter().map(|v| ((v.clamp(lo, hi) - lo) / (hi - lo) * 255.0).round()).collect()
}

/// Gaussian-window SSIM with two-pass window statistics.
fn naive_ssim(a: &[f64], b: &[f64], w: usize, h: usize) -> f64 {
    const SIDE: usize = 11;
    let sigma = 1.5f64;
    let kernel: Vec<f64> = (0..SIDE * SIDE)
        .map(|i| {
            let (dx, dy) = ((i % SIDE) as f64 - 5.0, (i / SIDE) as f64 - 5.0);
            (-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let norm: f64 = kernel.iter().sum();
    let (c1, c2) = ((0.01f64 * 255.0).powi(2), (0.03f64 * 255.0).powi(2));
    let mut scores = Vec::new();
    for y0 in 0..=h - SIDE {
        for x0 in 0..=w - SIDE {
            let at = |img: &[f64], i: usize| img[(y0 + i / SIDE) * w + x0 + i % SIDE];
            let mean = |img: &[f64]| (0..SIDE * SIDE).map(|i| kernel[i] * at(img, i)).sum::<f64>() / norm;
            let (ma, mb) = (mean(a), mean(b));
            let cov = |p: &[f64], mp: f64, q: &[f64], mq: f64| {
                (0..SIDE * SIDE).map(|i| kernel[i] * (at(p, i) - mp) * (at(q, i) - mq)).sum::<f64>() / norm
            };
            let (va, vb, cab) = (cov(a, ma, a, ma), cov(b, mb, b, mb), cov(a, ma, b, mb));
            scores.push((2.0 * ma * mb + c1) * (2.0 * cab + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2)));
        }
    }
    scores.iter().sum::<f64>() / scores.len() as f64
}

fn naive_psnr(a: &[f64], b: &[f64]) -> f64 {
    let mse = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64;
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (255.0 * 255.0 / mse).log10()
    }
}

fn criterion_5() -> Outcome {
    let range = NormalizationRange::new(-150.0, -40.0).map_err(|e| e.to_string())?;
    let grid = GridSpec::<f64>::square(16).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut worst, mut mae_le_rmse) = (0.0f64, true);
    for _ in 0..100 {
        let mut random_map = || {
            let values = (0..256).map(|_| rng.random_range(-160.0..-30.0)).collect();
            RadioMap::new(grid, Grid2::from_vec(16, 16, values).unwrap()).unwrap()
        };
        let (p, q) = (random_map(), random_map());
        let d: Vec<f64> = p.values_dbm.as_slice().iter().zip(q.values_dbm.as_slice()).map(|(a, b)| a - b).collect();
        let ref_rmse = (d.iter().map(|v| v * v).sum::<f64>() / 256.0).sqrt();
        let ref_mae = d.iter().map(|v| v.abs()).sum::<f64>() / 256.0;
        let (pa, pb) = (pixel_levels(&p, &range), pixel_levels(&q, &range));
        let got = [
            rmse(&p, &q).map_err(|e| e.to_string())?,
            mae(&p, &q).map_err(|e| e.to_string())?,
            ssim(&p, &q, &range).map_err(|e| e.to_string())?,
            psnr(&p, &q, &range).map_err(|e| e.to_string())?,
        ];
        let want = [ref_rmse, ref_mae, naive_ssim(&pa, &pb, 16, 16), naive_psnr(&pa, &pb)];
        for (g, w) in got.iter().zip(want) {
            worst = worst.max((g - w).abs());
        }
        mae_le_rmse &= got[1] <= got[0];
    }

    let base: Vec<f64> = (0..256).map(|i| range.rsrp_min_dbm + (i % 240) as f64 / 255.0 * range.span()).collect();
    let shifted: Vec<f64> = base.iter().map(|v| v + 16.0 / 255.0 * range.span()).collect();
    let p = RadioMap::new(grid, Grid2::from_vec(16, 16, base).unwrap()).unwrap();
    let q = RadioMap::new(grid, Grid2::from_vec(16, 16, shifted).unwrap()).unwrap();
    let self_ssim = ssim(&p, &p, &range).map_err(|e| e.to_string())?;
    let uniform = psnr(&p, &q, &range).map_err(|e| e.to_string())?;
    let exact = 10.0 * (255.0f64 * 255.0 / 256.0).log10();
    check(
        worst < 1e-9 && self_ssim == 1.0 && (uniform - exact).abs() < 1e-3 && mae_le_rmse,
        format!(
            "max |diff| vs references {worst:.2e}, SSIM(x,x) = {self_ssim}, uniform 16-level PSNR {uniform:.4} dB \
             (10log10(255^2/256) = {exact:.4}; stated 24.0474 differs by {:.4}), mae <= rmse: {mae_le_rmse}",
            (uniform - 24.0474).abs()
        ),
    )
}

// ---------------------------------------------------------------- 6

fn criterion_6() -> Outcome {
    let ids: Vec<String> = (0..3518).map(|i| format!("group_{i:04}")).collect();
    let s = split_dataset(&ids, 0).map_err(|e| e.to_string())?;
    let sizes = s.sizes();
    let mut all: Vec<&String> = s.parts().iter().flat_map(|p| p.iter()).collect();
    all.sort();
    all.dedup();
    check(
        sizes == [1407, 1055, 352, 352, 352] && all.len() == 3518,
        format!("sizes {sizes:?}, {} distinct ids", all.len()),
    )
}

// ---------------------------------------------------------------- 10

fn criterion_10() -> Outcome {
    let cfg = RunConfig::default();
    let count = |stage: Stage| -> Result<usize, String> {
        let g = Generator::<f32>::new(cfg.generator_spec(stage), 0).map_err(|e| e.to_string())?;
        let d = Discriminator::<f32>::new(cfg.discriminator_spec(stage), 0).map_err(|e| e.to_string())?;
        Ok(g.count_parameters() + d.count_parameters())
    };
    let (rmp, rmc) = (count(Stage::Predict)?, count(Stage::Correct)?);
    let within = |n: usize, target: f64| (n as f64 / target - 1.0).abs() <= 0.25;
    check(
        within(rmp, 20.0e6) && within(rmc, 25.8e6),
        format!("RMP-GAN {:.2} M (target 20.0 M), RMC-GAN {:.2} M (target 25.8 M)", rmp as f64 / 1e6, rmc as f64 / 1e6),
    )
}

// ---------------------------------------------------------------- toy runs

const TOY_SCENES: usize = 300;
const TOY_SEEDS: [u64; 3] = [0, 1, 2];
const TOY_DENSITY_PCT: f64 = 2.9;
const SWEEP_PCTS: [f64; 5] = [0.5, 1.0, 2.9, 5.0, 10.0];

fn toy_config(seed: u64) -> RunConfig {
    let mut cfg = RunConfig::default();
    for (k, v) in [
        ("grid_size", "64"),
        ("net_levels", "5"),
        ("net_base_channels", "16"),
        ("net_max_channels", "128"),
        ("net_sa_resolutions", "16"),
        ("disc_levels", "3"),
        ("disc_base_channels", "16"),
        ("rmp_epochs", "15"),
        ("rmc_epochs", "15"),
        ("rmc_batch_size", "4"),
        ("rmc_learning_rate", "5e-4"),
        ("eval_timing", "false"),
    ] {
        cfg.set(k, v).expect("toy key");
    }
    cfg.measurement_count = measurement_count_for(TOY_DENSITY_PCT, &cfg.grid_spec());
    cfg.seed = seed;
    cfg.validate().expect("toy config");
    cfg
}

struct ToyRun {
    cfg: RunConfig,
    data: Dataset,
    splits: DatasetSplits,
    rmp: Checkpoint,
    rmc: Checkpoint,
    report: EvalReport,
}

fn toy_run(seed: u64) -> fptc_pipeline::Result<ToyRun> {
    let cfg = toy_config(seed);
    let data = Dataset::synthesize(&cfg, TOY_SCENES)?;
    let splits = split_dataset(&data.ids(), cfg.seed)?;
    let rmp = train_rmp::<f32>(&cfg, &data, &splits, &[])?.checkpoint;
    let rmc = train_rmc::<f32>(&cfg, &data, &splits, &rmp, &[])?.checkpoint;
    let mut p = Model::<f32>::from_checkpoint(&rmp)?;
    let mut c = Model::<f32>::from_checkpoint(&rmc)?;
    let test = data.select(&splits.test)?;
    let report = evaluate_split(&mut p, Some(&mut c), &test, &cfg.range, &EvalOptions::from_config(&cfg))?;
    Ok(ToyRun { cfg, data, splits, rmp, rmc, report })
}

fn majority(wins: usize) -> bool {
    2 * wins > TOY_SEEDS.len()
}

fn criterion_7(runs: &[ToyRun]) -> Outcome {
    let mut wins = 0;
    let mut parts = Vec::new();
    for run in runs {
        let er = run.report.er.mean.rmse_dbm;
        let pre = run.report.pre.mean.rmse_dbm;
        let cor = run.report.cor.as_ref().ok_or("no corrected maps")?.mean.rmse_dbm;
        if cor < pre && pre < er {
            wins += 1;
        }
        parts.push(format!("seed {}: cor {cor:.3} pre {pre:.3} er {er:.3}", run.cfg.seed));
    }
    check(majority(wins), format!("{wins}/{} seeds with cor < pre < er; {}", runs.len(), parts.join("; ")))
}

fn criterion_8(run: &ToyRun) -> Outcome {
    let curve = density_sweep::<f32>(&SWEEP_PCTS, &run.cfg, &run.data, &run.splits, &run.rmp, None)
        .map_err(|e| e.to_string())?;
    let rmse: Vec<f64> = curve.points.iter().map(|p| p.mean.rmse_dbm).collect();
    let (lowest, highest) = (rmse[0], *rmse.last().expect("non-empty sweep"));
    let listing: Vec<String> =
        curve.points.iter().map(|p| format!("{}%: {:.3}", p.percentage, p.mean.rmse_dbm)).collect();
    check(
        curve.points.len() >= 4 && highest <= lowest + 0.1,
        format!("seed {}, corrected RMSE by density {}", run.cfg.seed, listing.join(", ")),
    )
}

fn criterion_9(runs: &[ToyRun]) -> Outcome {
    let plan = AblationPlan { predict: vec![FeatureKind::Er, FeatureKind::Ln], correct: Vec::new() };
    let (mut er_wins, mut ln_wins) = (0, 0);
    let mut parts = Vec::new();
    for run in runs {
        let table = ablation_suite::<f32>(&run.cfg, &run.data, &run.splits, &plan, Some((&run.rmp, &run.rmc)))
            .map_err(|e| e.to_string())?;
        let rmse =
            |removed| table.get(Stage::Predict, removed).map(|r| r.record.rmse_dbm).ok_or("missing ablation row");
        let (base, no_er, no_ln) = (rmse(None)?, rmse(Some(FeatureKind::Er))?, rmse(Some(FeatureKind::Ln))?);
        er_wins += usize::from(no_er >= base);
        ln_wins += usize::from(no_ln >= base);
        parts.push(format!("seed {}: full {base:.3} -M_er {no_er:.3} -M_ln {no_ln:.3}", run.cfg.seed));
    }
    check(
        majority(er_wins) && majority(ln_wins),
        format!("not improved without M_er {er_wins}/3, without M_ln {ln_wins}/3; {}", parts.join("; ")),
    )
}

fn criterion_11(run: &ToyRun) -> Outcome {
    let again = toy_run(run.cfg.seed).map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut identical = true;
    for (stage, a, b) in [("rmp", &run.rmp, &again.rmp), ("rmc", &run.rmc, &again.rmc)] {
        let (pa, pb) = (dir.path().join(format!("{stage}_a.csv")), dir.path().join(format!("{stage}_b.csv")));
        fptc_pipeline::train::write_log(&a.header.history, &pa).map_err(|e| e.to_string())?;
        fptc_pipeline::train::write_log(&b.header.history, &pb).map_err(|e| e.to_string())?;
        identical &= std::fs::read(&pa).map_err(|e| e.to_string())? == std::fs::read(&pb).map_err(|e| e.to_string())?;
    }
    let lines = log_csv(&run.rmp.header.history).lines().count() + log_csv(&run.rmc.header.history).lines().count();
    check(identical, format!("seed {}, training logs byte-identical: {identical} ({lines} lines)", run.cfg.seed))
}

// ---------------------------------------------------------------- driver

fn report(n: usize, started: Instant, outcome: std::thread::Result<Outcome>) -> bool {
    let secs = started.elapsed().as_secs_f64();
    let (ok, detail) = match outcome {
        Ok(Ok(d)) => (true, d),
        Ok(Err(d)) => (false, d),
        Err(panic) => {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        }
    };
    println!("criterion {n:>2}: {} [{secs:.1}s] {detail}", if ok { "PASS" } else { "FAIL" });
    ok
}

fn run(n: usize, f: impl FnOnce() -> Outcome) -> bool {
    let started = Instant::now();
    report(n, started, catch_unwind(AssertUnwindSafe(f)))
}

fn main() -> ExitCode {
    let mut ok = true;
    ok &= run(1, criterion_1);
    ok &= run(2, criterion_2);
    ok &= run(3, criterion_3);
    ok &= run(4, criterion_4);
    ok &= run(5, criterion_5);
    ok &= run(6, criterion_6);
    ok &= run(10, criterion_10);

    let started = Instant::now();
    let runs: Result<Vec<ToyRun>, String> = TOY_SEEDS.iter().map(|&s| toy_run(s).map_err(|e| e.to_string())).collect();
    let runs = match runs {
        Ok(r) => r,
        Err(e) => {
            for n in [7, 8, 9, 11] {
                report(n, started, Ok(Err(format!("toy training failed: {e}"))));
            }
            return ExitCode::FAILURE;
        }
    };
    ok &= report(7, started, catch_unwind(AssertUnwindSafe(|| criterion_7(&runs))));
    ok &= run(8, || criterion_8(&runs[0]));
    ok &= run(9, || criterion_9(&runs));
    ok &= run(11, || criterion_11(&runs[0]));

    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
