//! Sequential-learning baseline: UCB over a fixed action grid where each
//! user is served a single action for the whole episode and intermediate
//! feedback is ignored.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::env::Subject;
use crate::error::{Error, Result};
use crate::math::{ln, sqrt};

/// Default number of arms, spread evenly over `[0, 1]`.
pub const SL_GRID: usize = 21;

/// Shared arm statistics across users.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlState {
    arms: Vec<f64>,
    pulls: Vec<u64>,
    sums: Vec<f64>,
    total: u64,
    /// Episode rewards are divided by this before entering the index so the
    /// exploration bonus and the means share a scale.
    scale: f64,
}

impl SlState {
    pub fn new(arms: Vec<f64>, scale: f64) -> Result<Self> {
        if arms.is_empty() {
            return Err(Error::InvalidInput("SL needs at least one arm"));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Domain {
                what: "SL reward scale",
                value: scale,
            });
        }
        let n = arms.len();
        Ok(Self {
            arms,
            pulls: alloc::vec![0; n],
            sums: alloc::vec![0.0; n],
            total: 0,
            scale,
        })
    }

    /// `m` evenly spaced arms with rewards normalised by `r_max / (1 − γ)`.
    pub fn uniform_grid(m: usize, r_max: f64, gamma: f64) -> Result<Self> {
        let arms = match m {
            0 => Vec::new(),
            1 => alloc::vec![0.0],
            _ => (0..m).map(|i| i as f64 / (m - 1) as f64).collect(),
        };
        Self::new(arms, r_max / (1.0 - gamma))
    }

    pub fn arms(&self) -> &[f64] {
        &self.arms
    }

    pub fn pulls(&self) -> &[u64] {
        &self.pulls
    }

    pub fn mean(&self, arm: usize) -> Option<f64> {
        (self.pulls[arm] > 0).then(|| self.sums[arm] / self.pulls[arm] as f64)
    }

    /// Unplayed arms first in grid order, then the largest UCB index;
    /// ties go to the lower arm.
    pub fn select(&self) -> usize {
        if let Some(i) = self.pulls.iter().position(|&n| n == 0) {
            return i;
        }
        let log_n = ln(self.total as f64);
        let mut best = 0;
        let mut best_index = f64::NEG_INFINITY;
        for (i, (&n, &s)) in self.pulls.iter().zip(&self.sums).enumerate() {
            let index = s / n as f64 / self.scale + sqrt(2.0 * log_n / n as f64);
            if index > best_index {
                best_index = index;
                best = i;
            }
        }
        best
    }

    pub fn record(&mut self, arm: usize, reward: f64) {
        self.pulls[arm] += 1;
        self.sums[arm] += reward;
        self.total += 1;
    }
}

/// Serves one user: picks an arm, plays it for the whole episode and
/// updates the arm with the episode's discounted reward. The reward is read
/// through `reward_of` once the subject has settled.
pub fn sl_episode<S: Subject + ?Sized>(
    subject: &mut S,
    state: &mut SlState,
    reward_of: impl FnOnce(&S) -> f64,
) -> (usize, f64) {
    let arm = state.select();
    subject.settle(state.arms[arm]);
    let reward = reward_of(subject);
    state.record(arm, reward);
    (arm, reward)
}
