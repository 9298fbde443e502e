//! Discretized value tables over `(ℓ, u, B_r)` and the backward solver
//! shared by the oracle and the optimistic learners.
//!
//! States live on a uniform grid of `M` points. For a fixed budget layer
//! the value at `(ℓ, u)` depends only on states `(y, u)` with `y > ℓ` in the
//! same layer and on the previous layer, so each `u`-column of a layer is
//! an independent job.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{ceil_tol, floor_tol};
use crate::model::FeedbackMode;

/// Uniform grid `{0, 1/(M−1), …, 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    m: usize,
}

impl Grid {
    pub fn new(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::Domain {
                what: "grid size",
                value: m as f64,
            });
        }
        Ok(Self { m })
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        1.0 / (self.m - 1) as f64
    }

    #[inline]
    pub fn point(&self, i: usize) -> f64 {
        i as f64 / (self.m - 1) as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.m).map(|i| self.point(i))
    }

    /// Largest grid index at or below `x`.
    pub fn snap_down(&self, x: f64) -> usize {
        let i = floor_tol(x * (self.m - 1) as f64);
        (i.max(0.0) as usize).min(self.m - 1)
    }

    /// Smallest grid index at or above `x`.
    pub fn snap_up(&self, x: f64) -> usize {
        let i = ceil_tol(x * (self.m - 1) as f64);
        (i.max(0.0) as usize).min(self.m - 1)
    }

    /// Widths `u − ℓ ≤ width` correspond to index gaps `≤ steps(width)`.
    pub fn steps(&self, width: f64) -> usize {
        floor_tol(width * (self.m - 1) as f64).max(0.0) as usize
    }
}

/// Platform belief `[ℓ, u]` about a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyInterval {
    pub lower: f64,
    pub upper: f64,
}

impl UncertaintyInterval {
    pub const FULL: Self = Self {
        lower: 0.0,
        upper: 1.0,
    };

    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(0.0 <= lower && lower <= upper && upper <= 1.0) {
            return Err(Error::InvalidInput("interval needs 0 ≤ ℓ ≤ u ≤ 1"));
        }
        Ok(Self { lower, upper })
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableKind {
    Oracle,
    Optimistic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableHeader {
    pub kind: TableKind,
    pub mode: FeedbackMode,
    pub config_hash: u64,
    pub grid_m: usize,
    pub budget: u32,
    pub gamma: f64,
    pub delta: f64,
    pub delta_steps: usize,
}

/// Values and maximizing grid actions, stored `[b][iu][iℓ]` row-major.
/// Entries with `iℓ > iu` are unused and zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueTable {
    pub header: TableHeader,
    values: Vec<f64>,
    actions: Vec<u32>,
}

impl ValueTable {
    pub fn from_parts(header: TableHeader, values: Vec<f64>, actions: Vec<u32>) -> Result<Self> {
        let n = (header.budget as usize + 1) * header.grid_m * header.grid_m;
        if values.len() != n || actions.len() != n {
            return Err(Error::InvalidInput(
                "table arrays do not match header dimensions",
            ));
        }
        Ok(Self {
            header,
            values,
            actions,
        })
    }

    pub fn grid(&self) -> Grid {
        Grid {
            m: self.header.grid_m,
        }
    }

    pub fn budget(&self) -> u32 {
        self.header.budget
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn actions(&self) -> &[u32] {
        &self.actions
    }

    #[inline]
    fn idx(&self, il: usize, iu: usize, b: usize) -> usize {
        let m = self.header.grid_m;
        (b * m + iu) * m + il
    }

    /// Grid lookup; budget `−1` (the user is gone) is worth zero.
    #[inline]
    pub fn value(&self, il: usize, iu: usize, b: i64) -> f64 {
        if b < 0 {
            return 0.0;
        }
        self.values[self.idx(il, iu, b as usize)]
    }

    #[inline]
    pub fn action(&self, il: usize, iu: usize, b: u32) -> usize {
        self.actions[self.idx(il, iu, b as usize)] as usize
    }

    /// `V(0, 1, b)`.
    pub fn root_value(&self, b: u32) -> f64 {
        self.value(0, self.header.grid_m - 1, b as i64)
    }

    /// Off-grid queries snap `ℓ` down and `u` up, so the grid state contains
    /// the queried interval.
    pub fn value_at(&self, lower: f64, upper: f64, b: i64) -> Result<f64> {
        if !(0.0 <= lower && lower <= upper && upper <= 1.0) {
            return Err(Error::InvalidInput("value_at needs 0 ≤ ℓ ≤ u ≤ 1"));
        }
        if b > self.header.budget as i64 {
            return Err(Error::Domain {
                what: "budget",
                value: b as f64,
            });
        }
        let g = self.grid();
        Ok(self.value(g.snap_down(lower), g.snap_up(upper), b))
    }

    /// The δ-policy: `ℓ` when `u − ℓ ≤ δ`, otherwise the stored maximizer.
    pub fn delta_policy_action(&self, lower: f64, upper: f64, b: i64, delta: f64) -> Result<f64> {
        if b < 0 {
            return Err(Error::Absorbed);
        }
        if b > self.header.budget as i64 {
            return Err(Error::Domain {
                what: "budget",
                value: b as f64,
            });
        }
        if !(0.0 <= lower && lower <= upper && upper <= 1.0) {
            return Err(Error::InvalidInput("δ-policy needs 0 ≤ ℓ ≤ u ≤ 1"));
        }
        let g = self.grid();
        let (il, iu) = (g.snap_down(lower), g.snap_up(upper));
        if iu - il <= g.steps(delta) {
            return Ok(lower);
        }
        Ok(g.point(self.action(il, iu, b as u32)))
    }
}

/// Conditional probabilities of `A1 = {y < θ ≤ u}` and `A2 = {ℓ ≤ θ ≤ y}`
/// given `θ ∈ [ℓ, u]`, for grid action `iy > iℓ`.
pub(crate) trait Transition: Sync {
    fn probs(&self, il: usize, iu: usize, iy: usize) -> (f64, f64);
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Kernel {
    Hard,
    /// Reveal probabilities; a missing signal leaves the interval unchanged.
    Soft {
        p_pos: f64,
        p_neg: f64,
    },
}

pub(crate) struct Problem<'a, T: Transition> {
    pub grid: Grid,
    pub budget: u32,
    pub gamma: f64,
    pub delta_steps: usize,
    /// `r` at every grid point.
    pub rewards: &'a [f64],
    pub kernel: Kernel,
    pub transition: &'a T,
}

impl<T: Transition> Problem<'_, T> {
    pub(crate) fn solve(&self, header: TableHeader) -> ValueTable {
        let m = self.grid.len();
        let layers = self.budget as usize + 1;
        let mut values = vec![0.0; layers * m * m];
        let mut actions = vec![0u32; layers * m * m];
        // previous layer, transposed to [iℓ][iy]; zeros stand for budget −1
        let mut prev_t = vec![0.0; m * m];
        for b in 0..layers {
            let columns = self.columns(&prev_t);
            let base = b * m * m;
            for (iu, (vals, acts)) in columns.into_iter().enumerate() {
                let off = base + iu * m;
                values[off..off + vals.len()].copy_from_slice(&vals);
                actions[off..off + acts.len()].copy_from_slice(&acts);
            }
            for iu in 0..m {
                for il in 0..=iu {
                    prev_t[il * m + iu] = values[base + iu * m + il];
                }
            }
        }
        ValueTable {
            header,
            values,
            actions,
        }
    }

    #[cfg(feature = "parallel")]
    fn columns(&self, prev_t: &[f64]) -> Vec<(Vec<f64>, Vec<u32>)> {
        use rayon::prelude::*;
        (0..self.grid.len())
            .into_par_iter()
            .map(|iu| self.column(iu, prev_t))
            .collect()
    }

    #[cfg(not(feature = "parallel"))]
    fn columns(&self, prev_t: &[f64]) -> Vec<(Vec<f64>, Vec<u32>)> {
        (0..self.grid.len())
            .map(|iu| self.column(iu, prev_t))
            .collect()
    }

    /// Values `V(·, u, b)` for one `u`, sweeping `ℓ` downward so `V(y, u, b)`
    /// for every `y > ℓ` is already known.
    fn column(&self, iu: usize, prev_t: &[f64]) -> (Vec<f64>, Vec<u32>) {
        let m = self.grid.len();
        let gamma = self.gamma;
        let r = self.rewards;
        let mut col = vec![0.0; iu + 1];
        let mut act = vec![0u32; iu + 1];
        for il in (0..=iu).rev() {
            // playing ℓ forever
            let mut best = r[il] / (1.0 - gamma);
            let mut best_y = il;
            if iu - il > self.delta_steps {
                let down = &prev_t[il * m..il * m + m];
                match self.kernel {
                    Kernel::Hard => {
                        for iy in il + 1..=iu {
                            let (a1, a2) = self.transition.probs(il, iu, iy);
                            let v = a1 * (r[iy] + gamma * col[iy]) + a2 * gamma * down[iy];
                            if v > best {
                                best = v;
                                best_y = iy;
                            }
                        }
                    }
                    Kernel::Soft { p_pos, p_neg } => {
                        let down_u = down[iu];
                        for iy in il + 1..=iu {
                            let (a1, a2) = self.transition.probs(il, iu, iy);
                            let a = a1 * (r[iy] + gamma * p_pos * col[iy])
                                + a2 * gamma * (p_neg * down[iy] + (1.0 - p_neg) * down_u);
                            // self-loop weight from an unrevealed positive
                            let s = gamma * (1.0 - p_pos) * a1;
                            let v = a / (1.0 - s);
                            if v > best {
                                best = v;
                                best_y = iy;
                            }
                        }
                    }
                }
            }
            col[il] = best;
            act[il] = best_y as u32;
        }
        (col, act)
    }
}
