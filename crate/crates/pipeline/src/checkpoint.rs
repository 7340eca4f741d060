//! Binary checkpoints with a plain-text sidecar.
//!
//! Layout of `best.ckpt`: the magic line, a little-endian `u64` header length,
//! the JSON header, then the generator and discriminator states, each as a
//! `u64` count followed by that many little-endian `f64` values.

use std::io::Write;
use std::path::{Path, PathBuf};

use fptc_core::{NormalizationRange, RbfConfig, Stage};
use fptc_nn::{DiscriminatorSpec, GeneratorSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::train::{EpochRecord, TrainConfig};

pub const CHECKPOINT_FORMAT: &str = "FPTC-CKPT v1";
const MAGIC: &[u8] = b"FPTC-CKPT v1\n";
pub const CHECKPOINT_FILE: &str = "best.ckpt";
pub const META_FILE: &str = "best.meta.txt";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub stage: Stage,
    pub generator: GeneratorSpec,
    pub discriminator: DiscriminatorSpec,
    pub generator_fingerprint: String,
    pub discriminator_fingerprint: String,
    pub train: TrainConfig,
    pub range: NormalizationRange<f64>,
    pub rbf: RbfConfig<f64>,
    /// 1-based epoch the stored parameters come from.
    pub epoch: usize,
    pub history: Vec<EpochRecord>,
    /// Content fingerprint of the prediction checkpoint a correction stage was trained against.
    pub prior: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub header: CheckpointHeader,
    pub generator_state: Vec<f64>,
    pub discriminator_state: Vec<f64>,
}

/// `{dir}/{rmp|rmc}/best.ckpt`.
pub fn checkpoint_path(dir: &Path, stage: Stage) -> PathBuf {
    dir.join(stage.name()).join(CHECKPOINT_FILE)
}

fn corrupt(path: &Path, reason: impl Into<String>) -> Error {
    Error::Checkpoint { path: path.to_path_buf(), reason: reason.into() }
}

fn read_u64(bytes: &[u8], at: &mut usize, path: &Path) -> Result<u64> {
    let end = *at + 8;
    let chunk = bytes.get(*at..end).ok_or_else(|| corrupt(path, "truncated"))?;
    *at = end;
    Ok(u64::from_le_bytes(chunk.try_into().expect("8 bytes")))
}

fn read_state(bytes: &[u8], at: &mut usize, path: &Path) -> Result<Vec<f64>> {
    let n = read_u64(bytes, at, path)? as usize;
    let len = n.checked_mul(8).ok_or_else(|| corrupt(path, "state length overflow"))?;
    let chunk = bytes.get(*at..*at + len).ok_or_else(|| corrupt(path, "truncated state"))?;
    *at += len;
    Ok(chunk.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect())
}

impl Checkpoint {
    pub fn stage(&self) -> Stage {
        self.header.stage
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let header = serde_json::to_vec(&self.header).expect("header serializes");
        let mut out = Vec::with_capacity(
            MAGIC.len() + header.len() + 8 * (self.generator_state.len() + self.discriminator_state.len() + 3),
        );
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(header.len() as u64).to_le_bytes());
        out.extend_from_slice(&header);
        for state in [&self.generator_state, &self.discriminator_state] {
            out.extend_from_slice(&(state.len() as u64).to_le_bytes());
            for v in state {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    /// Parses and verifies a serialized checkpoint; `path` only labels errors.
    pub fn from_bytes(bytes: &[u8], path: &Path) -> Result<Self> {
        if !bytes.starts_with(MAGIC) {
            return Err(corrupt(path, "not a checkpoint file"));
        }
        let mut at = MAGIC.len();
        let hlen = read_u64(bytes, &mut at, path)? as usize;
        let hbytes = bytes.get(at..at + hlen).ok_or_else(|| corrupt(path, "truncated header"))?;
        at += hlen;
        let header: CheckpointHeader =
            serde_json::from_slice(hbytes).map_err(|e| corrupt(path, format!("bad header: {e}")))?;
        let generator_state = read_state(bytes, &mut at, path)?;
        let discriminator_state = read_state(bytes, &mut at, path)?;
        if at != bytes.len() {
            return Err(corrupt(path, "trailing bytes"));
        }
        if header.generator.fingerprint() != header.generator_fingerprint {
            return Err(corrupt(path, "generator spec fingerprint mismatch"));
        }
        if header.discriminator.fingerprint() != header.discriminator_fingerprint {
            return Err(corrupt(path, "discriminator spec fingerprint mismatch"));
        }
        Ok(Self { header, generator_state, discriminator_state })
    }

    /// Hex SHA-256 of the serialized checkpoint.
    pub fn content_fingerprint(&self) -> String {
        hex::encode(Sha256::digest(self.to_bytes()))
    }

    /// Writes `best.ckpt` and `best.meta.txt` into `dir`; returns the checkpoint path.
    pub fn save(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(CHECKPOINT_FILE);
        std::fs::write(&path, self.to_bytes()).map_err(|e| Error::io(&path, e))?;
        let meta = dir.join(META_FILE);
        let mut f = std::fs::File::create(&meta).map_err(|e| Error::io(&meta, e))?;
        f.write_all(self.meta_text().as_bytes()).map_err(|e| Error::io(&meta, e))?;
        Ok(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.is_file() {
            return Err(Error::MissingCheckpoint(path.to_path_buf()));
        }
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes, path)
    }

    /// `key=value` lines describing the checkpoint.
    pub fn meta_text(&self) -> String {
        let h = &self.header;
        let t = &h.train;
        let masked: Vec<&str> = t.masked.iter().map(|k| k.tag()).collect();
        let mut lines = vec![
            format!("stage={}", h.stage.name()),
            format!("epoch={}", h.epoch),
            format!("seed={}", t.seed),
            format!("learning_rate={}", t.learning_rate),
            format!("beta1={}", t.beta1),
            format!("beta2={}", t.beta2),
            format!("batch_size={}", t.batch_size),
            format!("epochs={}", t.epochs),
            format!("lambda_l2={}", t.lambda_l2),
            format!("measurement_count={}", t.measurement_count),
            format!("masked={}", masked.join(",")),
            format!("rsrp_min_dbm={}", h.range.rsrp_min_dbm),
            format!("rsrp_max_dbm={}", h.range.rsrp_max_dbm),
            format!("generator_fingerprint={}", h.generator_fingerprint),
            format!("discriminator_fingerprint={}", h.discriminator_fingerprint),
            format!("generator_spec={}", serde_json::to_string(&h.generator).expect("spec serializes")),
            format!("discriminator_spec={}", serde_json::to_string(&h.discriminator).expect("spec serializes")),
            format!("prior={}", h.prior.as_deref().unwrap_or("")),
        ];
        for r in &h.history {
            lines.push(format!("history.{}={},{},{},{}", r.epoch, r.d_loss, r.g_adv, r.g_l2, r.val_rmse));
        }
        lines.join("\n") + "\n"
    }
}
