//! JSON configuration document.
//!
//! ```json
//! {
//!   "reward": {"kind": "linear", "slope": 5.0},
//!   "distribution": {"kind": "uniform"},
//!   "gamma": 0.95, "budget": 4, "delta": 0.01, "beta": "auto",
//!   "phi": 2, "epsilon": 0.1,
//!   "feedback": {"mode": "soft", "p1": 0.5, "p2": 0.5},
//!   "grid_m": 201, "seed": 0
//! }
//! ```
//!
//! Every key except `budget` may be omitted and then takes the value of the
//! r(y)=5y / uniform / γ=0.95 desk preset. `radius_scale` and `horizon` are
//! optional extras.

use std::fs;
use std::path::Path;

use bandit_lab_core::model::{
    Beta, FeedbackModel, ModelConfig, RewardFunction, RewardShape, ThresholdDistribution,
};
use serde::{Deserialize, Serialize};

use crate::error::{io_err, json_err, LabError, LabResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum RewardDoc {
    Linear {
        slope: f64,
        #[serde(default)]
        intercept: f64,
    },
    Piecewise {
        knots: Vec<(f64, f64)>,
        lipschitz: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DistributionDoc {
    Uniform,
    Piecewise {
        knots: Vec<(f64, f64)>,
        l_c: f64,
        l_h: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase", deny_unknown_fields)]
pub enum FeedbackDoc {
    Hard,
    Soft { p1: f64, p2: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BetaDoc {
    Fixed(f64),
    Named(BetaName),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BetaName {
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDoc {
    pub budget: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reward: Option<RewardDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<DistributionDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<BetaDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feedback: Option<FeedbackDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius_scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u32>,
}

impl ConfigDoc {
    /// Builds and validates the model configuration. Soft-feedback warnings
    /// (such as `p1 + p2 ≥ 1`) are returned alongside.
    pub fn build(&self) -> LabResult<(ModelConfig, Vec<String>)> {
        let mut cfg = ModelConfig::numerical_setup(self.budget);
        if let Some(r) = &self.reward {
            cfg.reward = match r {
                RewardDoc::Linear { slope, intercept } => RewardFunction {
                    shape: RewardShape::Linear {
                        slope: *slope,
                        intercept: *intercept,
                    },
                    lipschitz: slope.abs(),
                },
                RewardDoc::Piecewise { knots, lipschitz } => {
                    RewardFunction::piecewise(knots.clone(), *lipschitz)?
                }
            };
        }
        if let Some(d) = &self.distribution {
            cfg.distribution = match d {
                DistributionDoc::Uniform => ThresholdDistribution::uniform(),
                DistributionDoc::Piecewise { knots, l_c, l_h } => {
                    ThresholdDistribution::piecewise(knots.clone(), *l_c, *l_h)?
                }
            };
        }
        if let Some(f) = &self.feedback {
            cfg.feedback = match *f {
                FeedbackDoc::Hard => FeedbackModel::hard(),
                FeedbackDoc::Soft { p1, p2 } => FeedbackModel::soft(p1, p2),
            };
        }
        if let Some(b) = self.beta {
            cfg.beta = match b {
                BetaDoc::Fixed(v) => Beta::Fixed(v),
                BetaDoc::Named(BetaName::Auto) => Beta::Auto,
            };
        }
        macro_rules! take {
            ($($field:ident),*) => { $(if let Some(v) = self.$field { cfg.$field = v; })* };
        }
        take!(
            gamma,
            delta,
            phi,
            epsilon,
            grid_m,
            seed,
            radius_scale,
            horizon
        );
        let v = cfg.validate();
        if !v.is_ok() {
            let msgs: Vec<String> = v.violations.iter().map(|i| i.to_string()).collect();
            return Err(LabError::Config(msgs.join("; ")));
        }
        Ok((cfg, v.warnings.iter().map(|i| i.to_string()).collect()))
    }

    /// The document describing an existing configuration.
    pub fn from_config(cfg: &ModelConfig) -> LabResult<Self> {
        let reward = match &cfg.reward.shape {
            RewardShape::Linear { slope, intercept } => RewardDoc::Linear {
                slope: *slope,
                intercept: *intercept,
            },
            RewardShape::Piecewise(c) => RewardDoc::Piecewise {
                knots: c.knots().to_vec(),
                lipschitz: cfg.reward.lipschitz,
            },
        };
        let distribution = match &cfg.distribution.shape {
            bandit_lab_core::model::DistributionShape::Uniform => DistributionDoc::Uniform,
            bandit_lab_core::model::DistributionShape::Piecewise(c) => DistributionDoc::Piecewise {
                knots: c.knots().to_vec(),
                l_c: cfg.distribution.l_c,
                l_h: cfg.distribution.l_h,
            },
        };
        let feedback = match cfg.feedback.mode {
            bandit_lab_core::FeedbackMode::Hard => FeedbackDoc::Hard,
            bandit_lab_core::FeedbackMode::Soft => FeedbackDoc::Soft {
                p1: cfg.feedback.p1,
                p2: cfg.feedback.p2,
            },
        };
        let beta = match cfg.beta {
            Beta::Fixed(v) => BetaDoc::Fixed(v),
            Beta::Auto => BetaDoc::Named(BetaName::Auto),
        };
        Ok(Self {
            budget: cfg.budget,
            reward: Some(reward),
            distribution: Some(distribution),
            gamma: Some(cfg.gamma),
            delta: Some(cfg.delta),
            beta: Some(beta),
            phi: Some(cfg.phi),
            epsilon: Some(cfg.epsilon),
            feedback: Some(feedback),
            grid_m: Some(cfg.grid_m),
            seed: Some(cfg.seed),
            radius_scale: Some(cfg.radius_scale),
            horizon: Some(cfg.horizon),
        })
    }
}

pub fn parse_config(text: &str) -> Result<ConfigDoc, serde_json::Error> {
    serde_json::from_str(text)
}

pub fn load_config(path: &Path) -> LabResult<(ModelConfig, Vec<String>)> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_config(&text).map_err(json_err(path))?.build()
}
