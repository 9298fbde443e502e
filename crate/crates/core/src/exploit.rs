//! Exploitation-set learner: optimistic value iteration from population
//! estimates, plus a random-walk estimate of the hidden residual budget
//! under soft feedback.

use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{Feedback, Subject};
use crate::error::{Error, Result};
use crate::estimate::EstimateSet;
use crate::model::{FeedbackMode, ModelConfig};
use crate::table::{Grid, Kernel, Problem, TableHeader, TableKind, Transition, ValueTable};

pub type PolicyTable = ValueTable;

/// Optimistic transition model on the action grid: `P_U(A1)` from the
/// empirical CDF plus the confidence radius, and `P_L(A2) = 1 − P_U(A1)`.
#[derive(Debug, Clone)]
pub struct OptimisticModel {
    grid: Grid,
    cdf: Vec<f64>,
    radius: f64,
    estimates: EstimateSet,
}

impl OptimisticModel {
    pub fn new(est: &EstimateSet, cfg: &ModelConfig) -> Result<Self> {
        if est.k == 0 {
            return Err(Error::NoData);
        }
        let grid = Grid::new(cfg.grid_m)?;
        Ok(Self {
            grid,
            cdf: grid.points().map(|x| est.cdf(x)).collect(),
            radius: est.bound_radius(cfg.delta),
            estimates: est.clone(),
        })
    }

    pub fn estimates(&self) -> &EstimateSet {
        &self.estimates
    }

    /// `(P_U(A1), P_L(A2))` for grid action `iy` in state `(iℓ, iu)`.
    #[inline]
    pub fn step_probs(&self, il: usize, iu: usize, iy: usize) -> (f64, f64) {
        let width = self.grid.point(iu) - self.grid.point(il);
        let f = &self.cdf;
        let base = self.estimates.base_ratio(f[il], f[iu], f[iy], width);
        let upper = (base + self.radius).min(1.0);
        (upper, 1.0 - upper)
    }
}

impl Transition for OptimisticModel {
    #[inline]
    fn probs(&self, il: usize, iu: usize, iy: usize) -> (f64, f64) {
        self.step_probs(il, iu, iy)
    }
}

fn solve_model(
    model: &OptimisticModel,
    cfg: &ModelConfig,
    kernel: Kernel,
    mode: FeedbackMode,
) -> PolicyTable {
    let grid = model.grid;
    let rewards: Vec<f64> = grid.points().map(|x| cfg.reward.value(x)).collect();
    let delta_steps = grid.steps(cfg.delta);
    let problem = Problem {
        grid,
        budget: cfg.budget,
        gamma: cfg.gamma,
        delta_steps,
        rewards: &rewards,
        kernel,
        transition: model,
    };
    problem.solve(TableHeader {
        kind: TableKind::Optimistic,
        mode,
        config_hash: cfg.fingerprint(),
        grid_m: cfg.grid_m,
        budget: cfg.budget,
        gamma: cfg.gamma,
        delta: cfg.delta,
        delta_steps,
    })
}

/// Optimistic table for soft feedback, using `p̂1` and `p̂2`.
pub fn solve_optimistic_soft(est: &EstimateSet, cfg: &ModelConfig) -> Result<PolicyTable> {
    let model = OptimisticModel::new(est, cfg)?;
    let kernel = Kernel::Soft {
        p_pos: est.p1_hat,
        p_neg: est.p2_hat,
    };
    Ok(solve_model(&model, cfg, kernel, FeedbackMode::Soft))
}

/// Optimistic table for hard feedback; the budget is observed.
pub fn solve_optimistic_hard(est: &EstimateSet, cfg: &ModelConfig) -> Result<PolicyTable> {
    let model = OptimisticModel::new(est, cfg)?;
    Ok(solve_model(&model, cfg, Kernel::Hard, FeedbackMode::Hard))
}

/// Learner state: grid interval and the residual-budget estimate `B̂_r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExploitState {
    pub lower: usize,
    pub upper: usize,
    pub budget: u32,
    /// Set once `B̂_r` would drop below zero; from then on the action is `ℓ`.
    pub absorbed: bool,
}

impl ExploitState {
    pub fn start(grid: Grid, budget: u32) -> Self {
        Self {
            lower: 0,
            upper: grid.len() - 1,
            budget,
            absorbed: false,
        }
    }

    fn decrement(&mut self) {
        match self.budget.checked_sub(1) {
            Some(b) => self.budget = b,
            None => self.absorbed = true,
        }
    }
}

/// Applies the feedback for grid action `iy`.
///
/// With no signal (soft feedback only) the interval is unchanged and the
/// budget estimate drops with probability
/// `P_L(A2)(1−p̂2) / (P_U(A1)(1−p̂1) + P_L(A2)(1−p̂2))`.
#[allow(clippy::too_many_arguments)]
pub fn update_exploit_state<R: Rng + ?Sized>(
    state: ExploitState,
    iy: usize,
    feedback: Feedback,
    mode: FeedbackMode,
    probs: (f64, f64),
    p1_hat: f64,
    p2_hat: f64,
    rng: &mut R,
) -> Result<ExploitState> {
    if state.absorbed {
        return Err(Error::InvalidInput("absorbed learner only plays ℓ"));
    }
    let mut next = state;
    match feedback {
        Feedback::Positive => next.lower = iy,
        Feedback::Negative => {
            next.upper = iy;
            next.decrement();
        }
        Feedback::None => {
            if mode == FeedbackMode::Hard {
                return Err(Error::MissingHardFeedback);
            }
            if rng.gen::<f64>() < budget_drop_prob(probs, p1_hat, p2_hat) {
                next.decrement();
            }
        }
    }
    Ok(next)
}

/// Posterior weight of "the action crossed" after an empty signal.
pub fn budget_drop_prob((upper_a1, lower_a2): (f64, f64), p1_hat: f64, p2_hat: f64) -> f64 {
    let keep = upper_a1 * (1.0 - p1_hat);
    let drop = lower_a2 * (1.0 - p2_hat);
    if keep + drop > 0.0 {
        drop / (keep + drop)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExploitOutcome {
    pub steps: u64,
    pub abandoned: bool,
    /// Hit the step horizon and settled on `ℓ` early.
    pub truncated: bool,
    pub final_state: ExploitState,
}

/// A solved optimistic table together with the model that produced it;
/// shared read-only by every exploitation user.
#[derive(Debug, Clone)]
pub struct Exploiter {
    pub table: PolicyTable,
    model: OptimisticModel,
    mode: FeedbackMode,
}

impl Exploiter {
    pub fn new(est: &EstimateSet, cfg: &ModelConfig) -> Result<Self> {
        let model = OptimisticModel::new(est, cfg)?;
        let (kernel, mode) = match cfg.feedback.mode {
            FeedbackMode::Hard => (Kernel::Hard, FeedbackMode::Hard),
            FeedbackMode::Soft => (
                Kernel::Soft {
                    p_pos: est.p1_hat,
                    p_neg: est.p2_hat,
                },
                FeedbackMode::Soft,
            ),
        };
        let table = solve_model(&model, cfg, kernel, mode);
        Ok(Self { table, model, mode })
    }

    pub fn model(&self) -> &OptimisticModel {
        &self.model
    }
}

pub fn exploit_user<S: Subject + ?Sized, R: Rng + ?Sized>(
    subject: &mut S,
    exploiter: &Exploiter,
    rng: &mut R,
    horizon: u32,
) -> Result<ExploitOutcome> {
    exploit_user_observed(subject, exploiter, rng, horizon, |_, _| {})
}

/// Like [`exploit_user`], calling `observe(subject, state)` after every update.
pub fn exploit_user_observed<S, R, F>(
    subject: &mut S,
    exploiter: &Exploiter,
    rng: &mut R,
    horizon: u32,
    mut observe: F,
) -> Result<ExploitOutcome>
where
    S: Subject + ?Sized,
    R: Rng + ?Sized,
    F: FnMut(&S, &ExploitState),
{
    let table = &exploiter.table;
    let grid = table.grid();
    let delta_steps = table.header.delta_steps;
    let est = exploiter.model.estimates();
    let mut state = ExploitState::start(grid, table.budget());
    let mut steps = 0u64;
    loop {
        if state.absorbed || state.upper - state.lower <= delta_steps {
            subject.settle(grid.point(state.lower));
            break;
        }
        let iy = table.action(state.lower, state.upper, state.budget);
        if iy == state.lower {
            subject.settle(grid.point(iy));
            break;
        }
        if steps >= horizon as u64 {
            subject.settle(grid.point(state.lower));
            return Ok(ExploitOutcome {
                steps,
                abandoned: false,
                truncated: true,
                final_state: state,
            });
        }
        let obs = subject.act(grid.point(iy))?;
        steps += 1;
        if obs.abandoned {
            return Ok(ExploitOutcome {
                steps,
                abandoned: true,
                truncated: false,
                final_state: state,
            });
        }
        let probs = exploiter.model.step_probs(state.lower, state.upper, iy);
        state = update_exploit_state(
            state,
            iy,
            obs.feedback,
            exploiter.mode,
            probs,
            est.p1_hat,
            est.p2_hat,
            rng,
        )?;
        observe(subject, &state);
    }
    Ok(ExploitOutcome {
        steps,
        abandoned: subject.is_gone(),
        truncated: false,
        final_state: state,
    })
}
