//! End-to-end runs: split the population, explore, estimate, solve the
//! optimistic table, exploit, and account the δ-regret against the oracle.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baseline::{sl_episode, SlState, SL_GRID};
use crate::env::Environment;
use crate::error::{Error, Result};
use crate::estimate::{confidence_radius, EstimateSet};
use crate::exploit::{exploit_user, Exploiter};
use crate::explore::{explore_index, EpisodeLog};
use crate::metrics::{delta_regret, split_users, SplitMode};
use crate::model::{Beta, FeedbackMode, ModelConfig};
use crate::oracle::{delta_policy_episode, OracleSolution};
use crate::rng::learner_stream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algo {
    UcbPviHf,
    UcbPviSf,
    Sl,
    DeltaOracle,
}

impl Algo {
    pub const ALL: [Algo; 4] = [Algo::UcbPviHf, Algo::UcbPviSf, Algo::Sl, Algo::DeltaOracle];

    pub fn as_str(self) -> &'static str {
        match self {
            Algo::UcbPviHf => "ucb-pvi-hf",
            Algo::UcbPviSf => "ucb-pvi-sf",
            Algo::Sl => "sl",
            Algo::DeltaOracle => "delta-oracle",
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algo::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or(Error::InvalidInput(
                "algo must be one of ucb-pvi-hf, ucb-pvi-sf, sl, delta-oracle",
            ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub algo: Algo,
    pub n: usize,
    pub seed: u64,
    /// Ground-truth discounted reward of every user, in user order.
    pub rewards: Vec<f64>,
    pub total_reward: f64,
    pub delta_regret: f64,
    pub v_star: f64,
    /// Exploration-set size `|L|`; 0 for algorithms that do not explore.
    pub size_l: usize,
    /// Survivors among the exploration users.
    pub k: usize,
    /// β used by the exploration learner.
    pub beta: f64,
    /// Longest exploration episode, in steps.
    pub waiting_time: u64,
    pub explore_abandoned: usize,
    /// Exploitation users stopped by the step horizon.
    pub truncated: usize,
}

/// β for an exploration set of `size_l` users.
pub fn resolve_beta(cfg: &ModelConfig, size_l: usize) -> Result<f64> {
    match cfg.beta {
        Beta::Fixed(b) => Ok(b),
        Beta::Auto => {
            let eta = confidence_radius(size_l.max(1), cfg.epsilon)?;
            let floor = 1.0 / crate::math::powi(cfg.phi as f64, cfg.budget);
            Ok((eta / (2.0 * cfg.distribution.l_h)).max(floor).min(1.0))
        }
    }
}

#[cfg(feature = "parallel")]
fn map_users<T: Send>(range: core::ops::Range<u64>, f: impl Fn(u64) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    range.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_users<T>(range: core::ops::Range<u64>, f: impl Fn(u64) -> T) -> Vec<T> {
    range.map(f).collect()
}

fn check_mode(cfg: &ModelConfig, algo: Algo) -> Result<()> {
    let want = match algo {
        Algo::UcbPviHf => FeedbackMode::Hard,
        Algo::UcbPviSf => FeedbackMode::Soft,
        _ => return Ok(()),
    };
    if cfg.feedback.mode != want {
        return Err(Error::InvalidInput(
            "ucb-pvi-hf needs hard feedback and ucb-pvi-sf soft feedback",
        ));
    }
    Ok(())
}

/// Exploration phase alone: `|L|` users explored with `beta`.
pub fn explore_population(
    env: &Environment,
    size_l: usize,
    beta: f64,
    phi: u32,
) -> Vec<EpisodeLog> {
    map_users(0..size_l as u64, |i| explore_index(env, i, beta, phi))
}

/// Simulates `n` users under `algo`. `oracle` is the δ-policy table for
/// `cfg` (same feedback mode); it supplies `V*_δ(0, 1, B)` and drives the
/// `delta-oracle` algorithm. Deterministic in `seed`.
pub fn run_pipeline(
    cfg: &ModelConfig,
    algo: Algo,
    n: usize,
    seed: u64,
    oracle: &OracleSolution,
) -> Result<RunReport> {
    cfg.checked()?;
    check_mode(cfg, algo)?;
    if oracle.header.budget != cfg.budget
        || oracle.header.grid_m != cfg.grid_m
        || oracle.header.mode != cfg.feedback.mode
    {
        return Err(Error::InvalidInput(
            "oracle table does not match the configuration",
        ));
    }
    let env = Environment::with_seed(cfg, seed);
    let v_star = oracle.root_value(cfg.budget);
    let mut report = RunReport {
        algo,
        n,
        seed,
        rewards: Vec::new(),
        total_reward: 0.0,
        delta_regret: 0.0,
        v_star,
        size_l: 0,
        k: 0,
        beta: 0.0,
        waiting_time: 0,
        explore_abandoned: 0,
        truncated: 0,
    };
    let rewards = match algo {
        Algo::DeltaOracle => map_users(0..n as u64, |i| {
            let mut s = env.session(env.spawn_user(i));
            delta_policy_episode(&mut s, oracle, cfg.horizon);
            s.ground_truth()
        }),
        Algo::Sl => {
            let mut state = SlState::uniform_grid(SL_GRID, cfg.reward.max_value(), cfg.gamma)?;
            (0..n as u64)
                .map(|i| {
                    let mut s = env.session(env.spawn_user(i));
                    sl_episode(&mut s, &mut state, |s| s.ground_truth()).1
                })
                .collect()
        }
        Algo::UcbPviHf | Algo::UcbPviSf => {
            let size_l = split_users(n, cfg.budget, cfg.epsilon, SplitMode::Practical)?;
            let beta = resolve_beta(cfg, size_l)?;
            let logs = explore_population(&env, size_l, beta, cfg.phi);
            report.size_l = size_l;
            report.beta = beta;
            report.waiting_time = logs.iter().map(|l| l.len() as u64).max().unwrap_or(0);
            report.explore_abandoned = logs.iter().filter(|l| l.abandoned).count();
            let est = EstimateSet::from_logs(&logs, beta, cfg)?;
            report.k = est.k;
            let exploiter = Exploiter::new(&est, cfg)?;
            let exploited = map_users(size_l as u64..n as u64, |i| {
                let mut s = env.session(env.spawn_user(i));
                let mut rng = learner_stream(seed, i);
                let out = exploit_user(&mut s, &exploiter, &mut rng, cfg.horizon);
                (s.ground_truth(), out.map(|o| o.truncated))
            });
            let mut rewards: Vec<f64> = logs.iter().map(|l| l.reward).collect();
            rewards.reserve(exploited.len());
            for (r, out) in exploited {
                report.truncated += out? as usize;
                rewards.push(r);
            }
            rewards
        }
    };
    report.total_reward = rewards.iter().sum();
    report.delta_regret = delta_regret(&rewards, v_star, n);
    report.rewards = rewards;
    Ok(report)
}
