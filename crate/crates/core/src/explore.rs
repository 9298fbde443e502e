//! Exploration-set learner: repeated linear search over the uncertainty
//! interval until it is narrower than β or the user leaves.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::env::{Environment, Feedback, Subject};
use crate::error::{Error, Result};
use crate::table::UncertaintyInterval;

/// Slack for comparing a floating width against β.
pub const WIDTH_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub y: f64,
    pub feedback: Feedback,
    /// `y ≤ ℓ_n` for the final interval.
    pub below_lower: bool,
    /// `y ≥ u_n` for the final interval.
    pub above_upper: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub user: u64,
    pub steps: Vec<StepRecord>,
    pub interval: UncertaintyInterval,
    pub rounds: u32,
    /// `γ^T(n)` once exploration stops.
    pub discount: f64,
    pub abandoned: bool,
    /// Ground-truth discounted reward including the steady-state tail;
    /// filled by the harness, never read by estimators.
    pub reward: f64,
}

impl EpisodeLog {
    pub fn is_survivor(&self, beta: f64) -> bool {
        !self.abandoned && self.interval.width() <= beta + WIDTH_TOL
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LseRound {
    pub interval: UncertaintyInterval,
    pub discount: f64,
    pub actions: Vec<(f64, Feedback)>,
    pub abandoned: bool,
}

/// One round of linear search: probe `ℓ, ℓ+I, …, ℓ+(φ−1)I, u` with
/// `I = (u−ℓ)/φ`, raising `ℓ` on positive feedback and stopping at the first
/// negative one.
pub fn lse<S: Subject + ?Sized>(
    subject: &mut S,
    interval: UncertaintyInterval,
    discount: f64,
    gamma: f64,
    phi: u32,
) -> Result<LseRound> {
    if subject.is_gone() {
        return Err(Error::Abandoned);
    }
    if !(interval.width() > 0.0) {
        return Err(Error::InvalidInput(
            "linear search needs a nondegenerate interval",
        ));
    }
    if phi < 2 {
        return Err(Error::Domain {
            what: "phi",
            value: phi as f64,
        });
    }
    let (start, end) = (interval.lower, interval.upper);
    let spacing = (end - start) / phi as f64;
    let mut lower = start;
    let mut upper = end;
    let mut d = discount;
    let mut actions = Vec::with_capacity(phi as usize + 1);
    let mut abandoned = false;
    for k in 0..=phi {
        let a = if k == phi {
            end
        } else {
            start + k as f64 * spacing
        };
        let obs = subject.act(a)?;
        d *= gamma;
        actions.push((a, obs.feedback));
        match obs.feedback {
            Feedback::Positive => lower = a,
            Feedback::Negative => upper = a,
            Feedback::None => {}
        }
        if obs.abandoned {
            abandoned = true;
            break;
        }
        if obs.feedback == Feedback::Negative {
            break;
        }
    }
    Ok(LseRound {
        interval: UncertaintyInterval { lower, upper },
        discount: d,
        actions,
        abandoned,
    })
}

/// Runs linear-search rounds while the interval is wider than β, then
/// commits to `ℓ` for the rest of the episode.
pub fn explore_user<S: Subject + ?Sized>(
    subject: &mut S,
    user: u64,
    beta: f64,
    gamma: f64,
    phi: u32,
) -> Result<EpisodeLog> {
    let mut interval = UncertaintyInterval::FULL;
    let mut discount = 1.0;
    let mut rounds = 0u32;
    let mut raw = Vec::new();
    let mut abandoned = subject.is_gone();
    while !abandoned && interval.width() > beta + WIDTH_TOL {
        let round = lse(subject, interval, discount, gamma, phi)?;
        rounds += 1;
        interval = round.interval;
        discount = round.discount;
        raw.extend(round.actions);
        abandoned = round.abandoned;
    }
    if !abandoned {
        subject.settle(interval.lower);
    }
    let steps = raw
        .into_iter()
        .map(|(y, feedback)| StepRecord {
            y,
            feedback,
            below_lower: y <= interval.lower,
            above_upper: y >= interval.upper,
        })
        .collect();
    Ok(EpisodeLog {
        user,
        steps,
        interval,
        rounds,
        discount,
        abandoned,
        reward: 0.0,
    })
}

/// Spawns user `index` and explores it, recording the ground-truth reward.
pub fn explore_index(env: &Environment, index: u64, beta: f64, phi: u32) -> EpisodeLog {
    let mut session = env.session(env.spawn_user(index));
    // A fresh user is active and the full interval is nondegenerate.
    let mut log = explore_user(&mut session, index, beta, env.gamma, phi)
        .expect("exploration of a fresh user cannot fail");
    log.reward = session.ground_truth();
    log
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::User;
    use crate::model::{FeedbackModel, ModelConfig};
    use alloc::vec;

    fn env(budget: u32, feedback: FeedbackModel, gamma: f64) -> Environment {
        let mut cfg = ModelConfig::numerical_setup(budget);
        cfg.feedback = feedback;
        cfg.gamma = gamma;
        Environment::new(&cfg)
    }

    #[test]
    fn lse_hand_trace_hard() {
        let gamma = 0.9;
        let e = env(3, FeedbackModel::hard(), gamma);
        let mut s = e.session(User::with_threshold(0, 0.7, 3, 1));
        let round = lse(&mut s, UncertaintyInterval::FULL, 1.0, gamma, 2).unwrap();
        assert_eq!(
            round.actions,
            vec![
                (0.0, Feedback::Positive),
                (0.5, Feedback::Positive),
                (1.0, Feedback::Negative)
            ]
        );
        assert_eq!(
            round.interval,
            UncertaintyInterval {
                lower: 0.5,
                upper: 1.0
            }
        );
        assert!((round.discount - gamma * gamma * gamma).abs() < 1e-15);
    }

    #[test]
    fn lse_halves_hard_intervals() {
        let e = env(20, FeedbackModel::hard(), 0.9);
        for i in 0..200 {
            let mut s = e.session(e.spawn_user(i));
            let mut iv = UncertaintyInterval::FULL;
            for _ in 0..6 {
                let r = lse(&mut s, iv, 1.0, 0.9, 2).unwrap();
                assert_eq!(r.interval.width(), iv.width() / 2.0);
                iv = r.interval;
            }
        }
    }

    #[test]
    fn lse_soft_without_signals_keeps_interval() {
        let gamma = 0.8;
        let e = env(5, FeedbackModel::soft(0.5, 0.5), gamma);
        // reveal only the positive at a = 0
        let user = User::with_threshold(0, 0.7, 5, 1).scripted([true, false, false]);
        let mut s = e.session(user);
        let r = lse(&mut s, UncertaintyInterval::FULL, 1.0, gamma, 2).unwrap();
        assert_eq!(r.interval, UncertaintyInterval::FULL);
        assert_eq!(r.actions.len(), 3);
        assert!((r.discount - gamma * gamma * gamma).abs() < 1e-15);
    }

    #[test]
    fn lse_rejects_gone_user() {
        let e = env(0, FeedbackModel::hard(), 0.9);
        let mut s = e.session(User::with_threshold(0, 0.1, 0, 1));
        s.act(0.5).unwrap();
        assert_eq!(
            lse(&mut s, UncertaintyInterval::FULL, 1.0, 0.9, 2),
            Err(Error::Abandoned)
        );
    }

    #[test]
    fn beta_one_means_immediate_steady_state() {
        let gamma = 0.9;
        let mut cfg = ModelConfig::numerical_setup(2);
        cfg.gamma = gamma;
        cfg.reward = crate::model::RewardFunction {
            shape: crate::model::RewardShape::Linear {
                slope: 5.0,
                intercept: 0.5,
            },
            lipschitz: 5.0,
        };
        let e = Environment::new(&cfg);
        let log = explore_index(&e, 4, 1.0, 2);
        assert_eq!(log.rounds, 0);
        assert!(log.is_survivor(1.0));
        assert!((log.reward - 0.5 / (1.0 - gamma)).abs() < 1e-12);
        assert_eq!(log.interval, UncertaintyInterval::FULL);
    }

    #[test]
    fn two_rounds_to_quarter_width() {
        let gamma = 0.9;
        let e = env(5, FeedbackModel::hard(), gamma);
        let mut s = e.session(User::with_threshold(0, 0.7, 5, 1));
        let log = explore_user(&mut s, 0, 0.25, gamma, 2).unwrap();
        assert_eq!(log.rounds, 2);
        assert_eq!(
            log.interval,
            UncertaintyInterval {
                lower: 0.5,
                upper: 0.75
            }
        );
        assert!(log.is_survivor(0.25));
        // round 1: 0 (+), 0.5 (+), 1 (−); round 2: 0.5 (+), 0.75 (−)
        let ys: Vec<f64> = log.steps.iter().map(|r| r.y).collect();
        assert_eq!(ys, vec![0.0, 0.5, 1.0, 0.5, 0.75]);
        assert_eq!(log.discount, gamma * gamma * gamma * gamma * gamma);
        let d = log.discount;
        let expected =
            5.0 * (0.0 + gamma * 0.5 + gamma.powi(3) * 0.5) + d * 5.0 * 0.5 / (1.0 - gamma);
        assert!((s.ground_truth() - expected).abs() < 1e-9);
        assert!(log.steps[0].below_lower && log.steps[2].above_upper && log.steps[4].above_upper);
    }

    #[test]
    fn zero_budget_abandons_in_first_round() {
        let e = env(0, FeedbackModel::hard(), 0.9);
        let mut s = e.session(User::with_threshold(0, 0.1, 0, 1));
        let log = explore_user(&mut s, 0, 0.25, 0.9, 2).unwrap();
        assert!(log.abandoned);
        assert!(!log.is_survivor(0.25));
        let seen: Vec<(f64, Feedback)> = log.steps.iter().map(|r| (r.y, r.feedback)).collect();
        assert_eq!(
            seen,
            vec![(0.0, Feedback::Positive), (0.5, Feedback::Negative)]
        );
        assert_eq!(
            log.interval,
            UncertaintyInterval {
                lower: 0.0,
                upper: 0.5
            }
        );
    }
}
