//! The full-information δ-policy: value iteration with the true threshold
//! distribution, true reveal probabilities and the observed residual budget.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::env::{Environment, Feedback, Session, Subject};
use crate::error::{Error, Result};
use crate::math::sqrt;
use crate::model::{FeedbackMode, ModelConfig, ThresholdDistribution};
use crate::table::{Grid, Kernel, Problem, TableHeader, TableKind, Transition, ValueTable};

pub type OracleSolution = ValueTable;

/// `(P(A1 | ℓ ≤ θ ≤ u), P(A2 | ℓ ≤ θ ≤ u))` for action `y`.
pub fn conditional_prob(
    dist: &ThresholdDistribution,
    lower: f64,
    upper: f64,
    y: f64,
) -> Result<(f64, f64)> {
    if !(0.0 <= lower && lower <= y && y <= upper && upper <= 1.0) {
        return Err(Error::InvalidInput(
            "conditional probability needs 0 ≤ ℓ ≤ y ≤ u ≤ 1",
        ));
    }
    let (fl, fu) = (dist.cdf(lower), dist.cdf(upper));
    if !(fu > fl) {
        return Err(Error::DegenerateInterval { lower, upper });
    }
    let a1 = ((fu - dist.cdf(y)) / (fu - fl)).clamp(0.0, 1.0);
    Ok((a1, 1.0 - a1))
}

struct TrueTransition {
    cdf: Vec<f64>,
}

impl Transition for TrueTransition {
    #[inline]
    fn probs(&self, il: usize, iu: usize, iy: usize) -> (f64, f64) {
        let f = &self.cdf;
        let a1 = (f[iu] - f[iy]) / (f[iu] - f[il]);
        (a1, 1.0 - a1)
    }
}

fn solve_with(cfg: &ModelConfig, kernel: Kernel, mode: FeedbackMode) -> Result<OracleSolution> {
    cfg.checked()?;
    let grid = Grid::new(cfg.grid_m)?;
    let rewards: Vec<f64> = grid.points().map(|x| cfg.reward.value(x)).collect();
    let transition = TrueTransition {
        cdf: grid.points().map(|x| cfg.distribution.cdf(x)).collect(),
    };
    let delta_steps = grid.steps(cfg.delta);
    let problem = Problem {
        grid,
        budget: cfg.budget,
        gamma: cfg.gamma,
        delta_steps,
        rewards: &rewards,
        kernel,
        transition: &transition,
    };
    Ok(problem.solve(TableHeader {
        kind: TableKind::Oracle,
        mode,
        config_hash: cfg.fingerprint(),
        grid_m: cfg.grid_m,
        budget: cfg.budget,
        gamma: cfg.gamma,
        delta: cfg.delta,
        delta_steps,
    }))
}

/// Hard-feedback δ-policy table. With `cfg.delta = 0` this is the optimal
/// table `V*`.
pub fn solve_hard(cfg: &ModelConfig) -> Result<OracleSolution> {
    solve_with(cfg, Kernel::Hard, FeedbackMode::Hard)
}

/// Soft-feedback δ-policy table using `cfg.feedback`'s reveal probabilities.
pub fn solve_soft(cfg: &ModelConfig) -> Result<OracleSolution> {
    let kernel = Kernel::Soft {
        p_pos: cfg.feedback.positive_prob(),
        p_neg: cfg.feedback.negative_prob(),
    };
    solve_with(cfg, kernel, FeedbackMode::Soft)
}

pub fn solve(cfg: &ModelConfig) -> Result<OracleSolution> {
    match cfg.feedback.mode {
        FeedbackMode::Hard => solve_hard(cfg),
        FeedbackMode::Soft => solve_soft(cfg),
    }
}

/// Runs the δ-policy on one user. The oracle reads the true residual budget.
pub fn delta_policy_episode(session: &mut Session<'_>, table: &OracleSolution, horizon: u32) {
    let grid = table.grid();
    let steps = table.header.delta_steps;
    let (mut il, mut iu) = (0usize, grid.len() - 1);
    for _ in 0..horizon {
        if iu - il <= steps {
            break;
        }
        let b = session.user().residual_budget();
        let iy = table.action(il, iu, b);
        if iy == il {
            break;
        }
        let obs = match session.act(grid.point(iy)) {
            Ok(obs) => obs,
            Err(_) => return,
        };
        if obs.abandoned {
            return;
        }
        match obs.feedback {
            Feedback::Positive => il = iy,
            Feedback::Negative => iu = iy,
            Feedback::None => {}
        }
    }
    session.settle(grid.point(il));
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub runs: usize,
}

/// Monte Carlo value of the δ-policy from `(0, 1, B)`.
pub fn mc_value(
    table: &OracleSolution,
    cfg: &ModelConfig,
    runs: usize,
    seed: u64,
) -> Result<McEstimate> {
    if runs == 0 {
        return Err(Error::InvalidInput("mc_value needs at least one run"));
    }
    let env = Environment::with_seed(cfg, seed);
    let rewards: Vec<f64> = (0..runs as u64)
        .map(|i| {
            let mut s = env.session(env.spawn_user(i));
            delta_policy_episode(&mut s, table, cfg.horizon);
            s.ground_truth()
        })
        .collect();
    Ok(mean_stderr(&rewards))
}

pub(crate) fn mean_stderr(xs: &[f64]) -> McEstimate {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    McEstimate {
        mean,
        stderr: sqrt(var / n),
        runs: xs.len(),
    }
}
