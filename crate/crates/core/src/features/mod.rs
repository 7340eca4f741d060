//! Construction of the network input maps and their assembly into stacks.
//!
//! Prediction stacks carry `[TP, OT, ER, LN]`; correction stacks carry
//! `[SM, IP, PRE]`. Every channel holds values in `[0, 1]`.

mod los;
mod measurements;
mod pathloss;
mod rbf;
mod topview;

pub use los::{los_boundary_height, los_indicator_map, obstruction_count, supercover_line};
pub use measurements::{measurement_map, sample_measurements, BACKGROUND_FLOOR};
pub use pathloss::{cost231_pathloss, empirical_radio_map, empirical_rsrp_dbm};
pub use rbf::{rbf_interpolate, rbf_interpolate_dbm, RbfConfig, RbfKernel, ShapeParam};
pub use topview::{obstacle_topview_map, transmitter_position_map};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid2;
use crate::normalize::NormalizationRange;
use crate::real::Real;
use crate::scene::RadioMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeatureKind {
    /// Transmitter position (one-hot).
    Tp,
    /// Obstacle top view, height-normalized.
    Ot,
    /// Empirical COST-231 radio map.
    Er,
    /// LoS/NLoS indicator.
    Ln,
    /// Sparse measurements.
    Sm,
    /// RBF-interpolated measurements.
    Ip,
    /// Normalized coarse prediction fed to the correction stage.
    Pre,
}

impl FeatureKind {
    pub fn tag(self) -> &'static str {
        match self {
            FeatureKind::Tp => "M_tp",
            FeatureKind::Ot => "M_ot",
            FeatureKind::Er => "M_er",
            FeatureKind::Ln => "M_ln",
            FeatureKind::Sm => "M_sm",
            FeatureKind::Ip => "M_ip",
            FeatureKind::Pre => "P_pre",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        let t = tag.trim().to_ascii_lowercase();
        let t = t.trim_start_matches("m_").trim_start_matches("p_");
        Some(match t {
            "tp" => FeatureKind::Tp,
            "ot" => FeatureKind::Ot,
            "er" => FeatureKind::Er,
            "ln" => FeatureKind::Ln,
            "sm" => FeatureKind::Sm,
            "ip" => FeatureKind::Ip,
            "pre" => FeatureKind::Pre,
            _ => return None,
        })
    }
}

/// One normalized input channel.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap<T> {
    pub kind: FeatureKind,
    pub values: Grid2<T>,
}

impl<T: Real> FeatureMap<T> {
    pub fn new(kind: FeatureKind, values: Grid2<T>) -> Result<Self> {
        let map = Self { kind, values };
        map.validate()?;
        Ok(map)
    }

    pub fn validate(&self) -> Result<()> {
        let vals = self.values.as_slice();
        if vals.iter().any(|v| !(*v >= T::zero() && *v <= T::one())) {
            return Err(Error::validation(format!("{} values must lie in [0, 1]", self.kind.tag())));
        }
        match self.kind {
            FeatureKind::Ln if vals.iter().any(|v| *v != T::zero() && *v != T::one()) => {
                Err(Error::validation("M_ln values must be 0 or 1"))
            }
            FeatureKind::Tp => {
                let ones = vals.iter().filter(|v| **v == T::one()).count();
                let nonzero = vals.iter().filter(|v| **v != T::zero()).count();
                if ones == 1 && nonzero == 1 {
                    Ok(())
                } else {
                    Err(Error::validation("M_tp must be one-hot"))
                }
            }
            _ => Ok(()),
        }
    }

    /// Same kind, every value zero. Used to knock a channel out in ablations.
    pub fn zeroed(&self) -> Self {
        Self { kind: self.kind, values: Grid2::filled(self.values.width(), self.values.height(), T::zero()) }
    }

    /// Normalized coarse prediction channel.
    pub fn from_prediction(p_pre: &RadioMap<T>, range: &NormalizationRange<T>) -> Self {
        Self { kind: FeatureKind::Pre, values: p_pre.values_dbm.map(|v| range.forward(v)) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stage {
    Predict,
    Correct,
}

impl Stage {
    pub fn channel_order(self) -> &'static [FeatureKind] {
        match self {
            Stage::Predict => &[FeatureKind::Tp, FeatureKind::Ot, FeatureKind::Er, FeatureKind::Ln],
            Stage::Correct => &[FeatureKind::Sm, FeatureKind::Ip, FeatureKind::Pre],
        }
    }

    pub fn in_channels(self) -> usize {
        self.channel_order().len()
    }

    pub fn name(self) -> &'static str {
        match self {
            Stage::Predict => "rmp",
            Stage::Correct => "rmc",
        }
    }
}

/// Ordered input channels for one network.
#[derive(Debug, Clone, PartialEq)]
pub struct InputStack<T> {
    pub stage: Stage,
    pub channels: Vec<FeatureMap<T>>,
}

impl<T: Real> InputStack<T> {
    pub fn width(&self) -> usize {
        self.channels[0].values.width()
    }

    pub fn height(&self) -> usize {
        self.channels[0].values.height()
    }

    /// Replaces the named channel with zeros, keeping the stack arity.
    pub fn with_zeroed(mut self, kind: FeatureKind) -> Result<Self> {
        let ch = self.channels.iter_mut().find(|c| c.kind == kind).ok_or_else(|| {
            Error::validation(format!("{} is not a channel of the {:?} stack", kind.tag(), self.stage))
        })?;
        *ch = ch.zeroed();
        Ok(self)
    }
}

/// Orders `parts` into the stage's fixed channel layout.
pub fn assemble_input_stack<T: Real>(stage: Stage, parts: Vec<FeatureMap<T>>) -> Result<InputStack<T>> {
    let order = stage.channel_order();
    if parts.len() != order.len() {
        return Err(Error::validation(format!(
            "{:?} stack needs {} channels, got {}",
            stage,
            order.len(),
            parts.len()
        )));
    }
    let shape = parts[0].values.shape();
    if parts.iter().any(|p| p.values.shape() != shape) {
        return Err(Error::validation("stack channels must share one grid"));
    }
    let mut slots: Vec<Option<FeatureMap<T>>> = vec![None; order.len()];
    for part in parts {
        let idx = order
            .iter()
            .position(|k| *k == part.kind)
            .ok_or_else(|| Error::validation(format!("{} does not belong in a {:?} stack", part.kind.tag(), stage)))?;
        if slots[idx].is_some() {
            return Err(Error::validation(format!("{} given twice", part.kind.tag())));
        }
        slots[idx] = Some(part);
    }
    Ok(InputStack { stage, channels: slots.into_iter().map(|s| s.expect("every slot filled")).collect() })
}
