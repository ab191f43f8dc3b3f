//! Working-memory window over recent EMUs and its short-term aggregate.
//!
//! The aggregate weights each buffered EMU by the product of exponential
//! recency, salience, and mean present-modality reliability, each floored
//! at `WEIGHT_FLOOR` to avoid zero-weight degeneracy.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::affect::{neutral_affect, weighted_blend_affect, AffectState, ContextAnchor, EmotionMemoryUnit};
use crate::error::{Error, Result};

/// Additive floor applied to the salience and reliability weight factors.
pub const WEIGHT_FLOOR: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkingMemoryConfig {
    #[serde(default = "default_window_k")]
    pub window_k: usize,
    #[serde(default = "default_recency_lambda")]
    pub recency_lambda: f64,
}

fn default_window_k() -> usize {
    8
}

fn default_recency_lambda() -> f64 {
    0.35
}

impl Default for WorkingMemoryConfig {
    fn default() -> Self {
        WorkingMemoryConfig { window_k: 8, recency_lambda: 0.35 }
    }
}

impl WorkingMemoryConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_k < 1 {
            return Err(Error::Config("window_k must be at least 1".into()));
        }
        if self.recency_lambda < 0.0 || !self.recency_lambda.is_finite() {
            return Err(Error::Config("recency_lambda must be non-negative".into()));
        }
        Ok(())
    }
}

/// Bounded buffer of recent EMUs plus the aggregated short-term state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkingMemoryState {
    pub buffer: VecDeque<EmotionMemoryUnit>,
    pub aggregate: AffectState,
    /// Weight-blended salience of the buffered EMUs.
    pub aggregate_salience: f64,
    /// Normalized weights from the most recent aggregation, oldest first.
    pub weights_last: Vec<f64>,
}

impl WorkingMemoryState {
    pub fn empty(label_count: usize) -> Self {
        WorkingMemoryState {
            buffer: VecDeque::new(),
            aggregate: neutral_affect(label_count),
            aggregate_salience: 0.0,
            weights_last: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    /// The window anchor is the most recent EMU's anchor.
    pub fn anchor(&self) -> Option<&ContextAnchor> {
        self.buffer.back().map(|emu| &emu.anchor)
    }

    /// Append one EMU, evicting the oldest beyond the window, and recompute
    /// the aggregate at `emu.timestamp`. Returns the new state.
    pub fn push(&self, emu: EmotionMemoryUnit, cfg: &WorkingMemoryConfig) -> Result<WorkingMemoryState> {
        if let Some(last) = self.buffer.back() {
            if emu.timestamp <= last.timestamp {
                return Err(Error::OrderingViolation {
                    previous: last.timestamp,
                    attempted: emu.timestamp,
                });
            }
        }
        let now = emu.timestamp;
        let mut buffer = self.buffer.clone();
        buffer.push_back(emu);
        while buffer.len() > cfg.window_k {
            buffer.pop_front();
        }
        let items: Vec<EmotionMemoryUnit> = buffer.iter().cloned().collect();
        let (aggregate, aggregate_salience, weights_last) = aggregate(&items, cfg, now)?;
        Ok(WorkingMemoryState { buffer, aggregate, aggregate_salience, weights_last })
    }
}

/// Aggregate a buffer of EMUs at time `now`.
///
/// Raw weight for EMU_i:
/// `exp(-lambda * (now - t_i)) * (0.05 + salience_i) * (0.05 + mean_reliability_i)`,
/// normalized to sum 1. Returns the blended affect, the blended salience, and
/// the normalized weights (in buffer order).
pub fn aggregate(
    buffer: &[EmotionMemoryUnit],
    cfg: &WorkingMemoryConfig,
    now: u64,
) -> Result<(AffectState, f64, Vec<f64>)> {
    if buffer.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let raw: Vec<f64> = buffer
        .iter()
        .map(|emu| {
            let age = now.saturating_sub(emu.timestamp) as f64;
            (-cfg.recency_lambda * age).exp()
                * (WEIGHT_FLOOR + emu.salience)
                * (WEIGHT_FLOOR + emu.mean_present_reliability())
        })
        .collect();
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();

    let items: Vec<(&AffectState, f64)> =
        buffer.iter().zip(&weights).map(|(emu, &w)| (&emu.affect, w)).collect();
    let affect = weighted_blend_affect(&items);
    let salience = buffer.iter().zip(&weights).map(|(emu, &w)| w * emu.salience).sum();
    Ok((affect, salience, weights))
}
