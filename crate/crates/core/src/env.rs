//! The threshold-user simulator.
//!
//! [`Environment::step`] is the raw transition. Learners never see it: they
//! drive a [`Session`] through the [`Subject`] trait, which hands back only
//! the revealed feedback and whether the user left. The session keeps the
//! ground-truth discounted reward on its own ledger.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FeedbackModel, ModelConfig, RewardFunction, ThresholdDistribution};
use crate::rng::{env_stream, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Feedback {
    Positive,
    Negative,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    /// `r(y)·1(y ≤ θ)`, undiscounted.
    pub raw_reward: f64,
    pub feedback: Feedback,
    pub abandoned_now: bool,
}

impl StepOutcome {
    pub fn observation(&self) -> Observation {
        Observation {
            feedback: self.feedback,
            abandoned: self.abandoned_now,
        }
    }
}

/// What a learner is allowed to see after an action.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Observation {
    pub feedback: Feedback,
    pub abandoned: bool,
}

/// Source of feedback-reveal coins.
#[derive(Debug, Clone)]
enum Reveals {
    Stream,
    /// Scripted outcomes for tests; popped once per revealable signal.
    Script(VecDeque<bool>),
}

#[derive(Debug, Clone)]
pub struct User {
    pub index: u64,
    threshold: f64,
    residual_budget: u32,
    interactions: u64,
    crossings: u32,
    abandoned: bool,
    rng: Stream,
    reveals: Reveals,
}

impl User {
    /// A user with a chosen threshold; reveals still come from its stream.
    pub fn with_threshold(index: u64, threshold: f64, budget: u32, seed: u64) -> Self {
        Self {
            index,
            threshold,
            residual_budget: budget,
            interactions: 0,
            crossings: 0,
            abandoned: false,
            rng: env_stream(seed, index),
            reveals: Reveals::Stream,
        }
    }

    /// Replace the reveal coins by a fixed script.
    pub fn scripted(mut self, script: impl IntoIterator<Item = bool>) -> Self {
        self.reveals = Reveals::Script(script.into_iter().collect());
        self
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn residual_budget(&self) -> u32 {
        self.residual_budget
    }

    pub fn interactions(&self) -> u64 {
        self.interactions
    }

    pub fn crossings(&self) -> u32 {
        self.crossings
    }

    pub fn is_abandoned(&self) -> bool {
        self.abandoned
    }

    fn reveal(&mut self, p: f64) -> bool {
        if p >= 1.0 {
            return true;
        }
        match &mut self.reveals {
            Reveals::Stream => FeedbackModel::reveal(p, &mut self.rng),
            Reveals::Script(s) => s.pop_front().unwrap_or(false),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Environment {
    pub reward: RewardFunction,
    pub distribution: ThresholdDistribution,
    pub feedback: FeedbackModel,
    pub budget: u32,
    pub gamma: f64,
    pub seed: u64,
}

impl Environment {
    pub fn new(cfg: &ModelConfig) -> Self {
        Self::with_seed(cfg, cfg.seed)
    }

    pub fn with_seed(cfg: &ModelConfig, seed: u64) -> Self {
        Self {
            reward: cfg.reward.clone(),
            distribution: cfg.distribution.clone(),
            feedback: cfg.feedback,
            budget: cfg.budget,
            gamma: cfg.gamma,
            seed,
        }
    }

    /// Draws user `index` from its own substream of the master seed.
    pub fn spawn_user(&self, index: u64) -> User {
        let mut rng = env_stream(self.seed, index);
        let threshold = self.distribution.sample(&mut rng);
        User {
            index,
            threshold,
            residual_budget: self.budget,
            interactions: 0,
            crossings: 0,
            abandoned: false,
            rng,
            reveals: Reveals::Stream,
        }
    }

    pub fn step(&self, user: &mut User, y: f64) -> Result<StepOutcome> {
        if user.abandoned {
            return Err(Error::Abandoned);
        }
        if !(0.0..=1.0).contains(&y) {
            return Err(Error::Domain {
                what: "action",
                value: y,
            });
        }
        user.interactions += 1;
        if y <= user.threshold {
            let feedback = if user.reveal(self.feedback.positive_prob()) {
                Feedback::Positive
            } else {
                Feedback::None
            };
            return Ok(StepOutcome {
                raw_reward: self.reward.value(y),
                feedback,
                abandoned_now: false,
            });
        }
        user.crossings += 1;
        let abandoned_now = if user.residual_budget == 0 {
            user.abandoned = true;
            true
        } else {
            user.residual_budget -= 1;
            false
        };
        let feedback = if user.reveal(self.feedback.negative_prob()) {
            Feedback::Negative
        } else {
            Feedback::None
        };
        Ok(StepOutcome {
            raw_reward: 0.0,
            feedback,
            abandoned_now,
        })
    }

    pub fn session(&self, user: User) -> Session<'_> {
        Session {
            env: self,
            user,
            reward: 0.0,
            discount: 1.0,
            settled: false,
            trace: None,
        }
    }
}

/// One line of an episode trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub user: u64,
    pub t: u64,
    pub y: f64,
    pub reward: f64,
    pub feedback: Feedback,
    pub b_r: u32,
    pub abandoned: bool,
}

/// The learner-facing view of a user.
pub trait Subject {
    fn act(&mut self, y: f64) -> Result<Observation>;
    /// Play `y` for the rest of the episode.
    fn settle(&mut self, y: f64);
    fn is_gone(&self) -> bool;
}

/// A user episode with its ground-truth reward ledger.
#[derive(Debug)]
pub struct Session<'e> {
    env: &'e Environment,
    user: User,
    reward: f64,
    discount: f64,
    settled: bool,
    trace: Option<Vec<TraceRecord>>,
}

impl<'e> Session<'e> {
    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    /// Σ γ^{t−1} r(y_t) 1(y_t ≤ θ), including any settled tail.
    pub fn ground_truth(&self) -> f64 {
        self.reward
    }

    /// γ^t after t recorded steps.
    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn steps(&self) -> u64 {
        self.user.interactions
    }

    pub fn user(&self) -> &User {
        &self.user
    }

    pub fn is_settled(&self) -> bool {
        self.settled
    }

    pub fn take_trace(&mut self) -> Vec<TraceRecord> {
        self.trace.take().unwrap_or_default()
    }

    pub fn into_user(self) -> User {
        self.user
    }
}

impl Subject for Session<'_> {
    fn act(&mut self, y: f64) -> Result<Observation> {
        if self.settled {
            return Err(Error::InvalidInput("episode already settled"));
        }
        let out = self.env.step(&mut self.user, y)?;
        self.reward += self.discount * out.raw_reward;
        self.discount *= self.env.gamma;
        if let Some(trace) = &mut self.trace {
            trace.push(TraceRecord {
                user: self.user.index,
                t: self.user.interactions,
                y,
                reward: out.raw_reward,
                feedback: out.feedback,
                b_r: self.user.residual_budget,
                abandoned: out.abandoned_now,
            });
        }
        Ok(out.observation())
    }

    fn settle(&mut self, y: f64) {
        if self.settled || self.user.abandoned {
            return;
        }
        self.settled = true;
        if y <= self.user.threshold {
            self.reward += self.discount * self.env.reward.value(y) / (1.0 - self.env.gamma);
        } else {
            // Every remaining step crosses until the budget runs out.
            while !self.user.abandoned {
                let _ = self.env.step(&mut self.user, y);
                self.discount *= self.env.gamma;
            }
        }
    }

    fn is_gone(&self) -> bool {
        self.user.abandoned
    }
}
