//! Population estimates built from exploration logs: survivor count, the
//! empirical threshold CDF, reveal probabilities and confidence bounds on
//! the conditional probability of a below-threshold action.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::env::Feedback;
use crate::error::{Error, Result};
use crate::explore::EpisodeLog;
use crate::math::{ln, sqrt};
use crate::model::{ModelConfig, ThresholdDistribution};

pub fn survivor_count(logs: &[EpisodeLog], beta: f64) -> usize {
    logs.iter().filter(|l| l.is_survivor(beta)).count()
}

/// Right-continuous step function over survivor lower bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    pub fn from_samples(mut xs: Vec<f64>) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::NoData);
        }
        xs.sort_by(f64::total_cmp);
        Ok(Self { sorted: xs })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.sorted.len() as f64
    }
}

pub fn empirical_cdf(logs: &[EpisodeLog], beta: f64) -> Result<Ecdf> {
    Ecdf::from_samples(
        logs.iter()
            .filter(|l| l.is_survivor(beta))
            .map(|l| l.interval.lower)
            .collect(),
    )
}

/// Additive counts behind `p̂1` and `p̂2`; partial folds merge by `+`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackCounts {
    pub positives: u64,
    pub below_lower: u64,
    pub negatives: u64,
    pub above_upper: u64,
}

impl FeedbackCounts {
    pub fn from_log(log: &EpisodeLog) -> Self {
        let mut c = Self::default();
        for s in &log.steps {
            match s.feedback {
                Feedback::Positive => c.positives += 1,
                Feedback::Negative => c.negatives += 1,
                Feedback::None => {}
            }
            c.below_lower += s.below_lower as u64;
            c.above_upper += s.above_upper as u64;
        }
        c
    }

    pub fn merge(self, o: Self) -> Self {
        Self {
            positives: self.positives + o.positives,
            below_lower: self.below_lower + o.below_lower,
            negatives: self.negatives + o.negatives,
            above_upper: self.above_upper + o.above_upper,
        }
    }

    pub fn ratios(&self) -> (f64, f64) {
        let ratio = |num: u64, den: u64| {
            if den == 0 {
                0.0
            } else {
                num as f64 / den as f64
            }
        };
        (
            ratio(self.positives, self.below_lower),
            ratio(self.negatives, self.above_upper),
        )
    }
}

/// `(p̂1, p̂2)` from survivor episodes only.
pub fn estimate_feedback_probs(logs: &[EpisodeLog], beta: f64) -> Result<(f64, f64)> {
    let mut k = 0usize;
    let counts = logs
        .iter()
        .filter(|l| l.is_survivor(beta))
        .inspect(|_| k += 1)
        .map(FeedbackCounts::from_log)
        .fold(FeedbackCounts::default(), FeedbackCounts::merge);
    if k == 0 {
        return Err(Error::NoData);
    }
    Ok(counts.ratios())
}

/// `η_K = √(18 ln(16/ε) / K)`.
pub fn confidence_radius(k: usize, epsilon: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::NoData);
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain {
            what: "epsilon",
            value: epsilon,
        });
    }
    Ok(sqrt(18.0 * ln(16.0 / epsilon) / k as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CdfSource {
    Empirical(Ecdf),
    /// The true distribution; the zero-error reference for tests and audits.
    Exact(ThresholdDistribution),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateSet {
    pub k: usize,
    pub cdf: CdfSource,
    pub p1_hat: f64,
    pub p2_hat: f64,
    pub eta: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub l_c: f64,
    pub l_h: f64,
    pub radius_scale: f64,
}

impl EstimateSet {
    pub fn from_logs(logs: &[EpisodeLog], beta: f64, cfg: &ModelConfig) -> Result<Self> {
        let ecdf = empirical_cdf(logs, beta)?;
        let (p1_hat, p2_hat) = estimate_feedback_probs(logs, beta)?;
        let k = ecdf.len();
        Ok(Self {
            k,
            eta: confidence_radius(k, cfg.epsilon)?,
            cdf: CdfSource::Empirical(ecdf),
            p1_hat,
            p2_hat,
            beta,
            epsilon: cfg.epsilon,
            l_c: cfg.distribution.l_c,
            l_h: cfg.distribution.l_h,
            radius_scale: cfg.radius_scale,
        })
    }

    /// Estimates equal to the truth, with zero confidence radius.
    pub fn exact(cfg: &ModelConfig) -> Self {
        Self {
            k: usize::MAX,
            cdf: CdfSource::Exact(cfg.distribution.clone()),
            p1_hat: cfg.feedback.positive_prob(),
            p2_hat: cfg.feedback.negative_prob(),
            eta: 0.0,
            beta: 0.0,
            epsilon: cfg.epsilon,
            l_c: cfg.distribution.l_c,
            l_h: cfg.distribution.l_h,
            radius_scale: cfg.radius_scale,
        }
    }

    #[inline]
    pub fn cdf(&self, x: f64) -> f64 {
        match &self.cdf {
            CdfSource::Empirical(e) => e.eval(x),
            CdfSource::Exact(d) => d.cdf(x),
        }
    }

    /// `2(η + 2βL_h) / (L_c δ)`, times the configured scale.
    pub fn bound_radius(&self, delta: f64) -> f64 {
        let num = self.radius_scale * 2.0 * (self.eta + 2.0 * self.beta * self.l_h);
        if num == 0.0 {
            0.0
        } else {
            num / (self.l_c * delta)
        }
    }

    /// Plug-in ratio `(F̂(u) − F̂(y)) / max(F̂(u) − F̂(ℓ), L_c(u − ℓ))`.
    #[inline]
    pub(crate) fn base_ratio(&self, fl: f64, fu: f64, fy: f64, width: f64) -> f64 {
        let den = (fu - fl).max(self.l_c * width);
        if den > 0.0 {
            (fu - fy) / den
        } else {
            0.0
        }
    }

    /// `(P_L, P_U)` for `A1 = {y < θ ≤ u}`, each clamped to `[0, 1]`.
    /// The bounds for `A2` are `1 − P_U` and `1 − P_L`.
    pub fn conditional_prob_bounds(
        &self,
        lower: f64,
        upper: f64,
        y: f64,
        delta: f64,
    ) -> Result<(f64, f64)> {
        if !(0.0 <= lower && lower <= y && y <= upper && upper <= 1.0) {
            return Err(Error::InvalidInput("bounds need 0 ≤ ℓ ≤ y ≤ u ≤ 1"));
        }
        if upper - lower <= delta {
            return Err(Error::InvalidInput(
                "interval within δ: play the conservative action",
            ));
        }
        let base = self.base_ratio(self.cdf(lower), self.cdf(upper), self.cdf(y), upper - lower);
        let r = self.bound_radius(delta);
        Ok(((base - r).max(0.0), (base + r).min(1.0)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explore::StepRecord;
    use crate::model::FeedbackModel;
    use crate::table::UncertaintyInterval;
    use alloc::vec;

    fn log(lower: f64, upper: f64, abandoned: bool) -> EpisodeLog {
        EpisodeLog {
            user: 0,
            steps: Vec::new(),
            interval: UncertaintyInterval { lower, upper },
            rounds: 1,
            discount: 1.0,
            abandoned,
            reward: 0.0,
        }
    }

    fn step(y: f64, feedback: Feedback, below: bool, above: bool) -> StepRecord {
        StepRecord {
            y,
            feedback,
            below_lower: below,
            above_upper: above,
        }
    }

    #[test]
    fn survivor_counts() {
        let all: Vec<_> = (0..100).map(|_| log(0.5, 0.55, false)).collect();
        assert_eq!(survivor_count(&all, 0.1), 100);
        let gone: Vec<_> = (0..100).map(|_| log(0.5, 0.55, true)).collect();
        assert_eq!(survivor_count(&gone, 0.1), 0);
        let mixed = vec![
            log(0.1, 0.15, false),
            log(0.1, 0.5, false),
            log(0.3, 0.32, false),
            log(0.3, 0.32, true),
            log(0.6, 0.7, false),
        ];
        assert_eq!(survivor_count(&mixed, 0.1), 3);
    }

    #[test]
    fn ecdf_values() {
        let logs = vec![
            log(0.2, 0.21, false),
            log(0.5, 0.51, false),
            log(0.8, 0.81, false),
        ];
        let f = empirical_cdf(&logs, 0.05).unwrap();
        assert!((f.eval(0.6) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(f.eval(0.1), 0.0);
        assert_eq!(f.eval(0.9), 1.0);
        assert!((f.eval(0.2) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(
            empirical_cdf(&[log(0.2, 0.9, false)], 0.05),
            Err(Error::NoData)
        );
    }

    #[test]
    fn feedback_ratio_from_counts() {
        let mut l = log(0.5, 0.55, false);
        l.steps = (0..10)
            .map(|i| {
                step(
                    0.1,
                    if i < 3 {
                        Feedback::Positive
                    } else {
                        Feedback::None
                    },
                    true,
                    false,
                )
            })
            .chain([step(0.9, Feedback::Negative, false, true)])
            .collect();
        let (p1, p2) = estimate_feedback_probs(&[l], 0.1).unwrap();
        assert!((p1 - 0.3).abs() < 1e-15);
        assert_eq!(p2, 1.0);
        assert_eq!(
            estimate_feedback_probs(&[log(0.0, 1.0, false)], 0.1),
            Err(Error::NoData)
        );
    }

    #[test]
    fn hard_logs_give_unit_probabilities() {
        let mut cfg = ModelConfig::numerical_setup(6);
        cfg.feedback = FeedbackModel::hard();
        let env = crate::env::Environment::new(&cfg);
        let logs: Vec<_> = (0..300)
            .map(|i| crate::explore::explore_index(&env, i, 0.1, 2))
            .collect();
        assert_eq!(estimate_feedback_probs(&logs, 0.1).unwrap(), (1.0, 1.0));
    }

    #[test]
    fn radius_formula() {
        let eta = confidence_radius(1800, 0.16).unwrap();
        let expected = libm::sqrt(18.0 * libm::log(100.0) / 1800.0);
        assert!((eta - expected).abs() < 1e-15);
        assert!((eta - 0.2146).abs() < 1e-4);
        let quarter = confidence_radius(7200, 0.16).unwrap();
        assert!((quarter - eta / 2.0).abs() < 1e-12);
        assert!(confidence_radius(usize::MAX, 0.16).unwrap() < 1e-8);
        assert_eq!(confidence_radius(0, 0.16), Err(Error::NoData));
    }

    fn uniform_exact(eta: f64, beta: f64) -> EstimateSet {
        let mut e = EstimateSet::exact(&ModelConfig::numerical_setup(1));
        e.eta = eta;
        e.beta = beta;
        e.radius_scale = 1.0;
        e
    }

    #[test]
    fn bounds_clamp() {
        let e = uniform_exact(0.1, 0.01);
        // radius 2(0.1 + 0.02)/(1 · 0.1) = 2.4
        assert!((e.bound_radius(0.1) - 2.4).abs() < 1e-12);
        assert_eq!(
            e.conditional_prob_bounds(0.0, 1.0, 0.5, 0.1).unwrap(),
            (0.0, 1.0)
        );
        assert!(e.conditional_prob_bounds(0.4, 0.45, 0.42, 0.1).is_err());
    }

    #[test]
    fn zero_radius_bounds_collapse_to_truth() {
        let e = uniform_exact(0.0, 0.0);
        let (lo, hi) = e.conditional_prob_bounds(0.2, 0.6, 0.3, 0.01).unwrap();
        assert_eq!(lo, hi);
        assert!((lo - 0.75).abs() < 1e-12);
    }

    #[test]
    fn bounds_are_ordered() {
        let logs: Vec<_> = (0..50)
            .map(|i| log(i as f64 / 50.0, i as f64 / 50.0 + 0.01, false))
            .collect();
        let mut cfg = ModelConfig::numerical_setup(1);
        cfg.radius_scale = 0.001;
        let e = EstimateSet::from_logs(&logs, 0.02, &cfg).unwrap();
        for i in 0..20 {
            let l = i as f64 / 40.0;
            let u = l + 0.4;
            for j in 0..=10 {
                let y = l + 0.04 * j as f64;
                let (lo, hi) = e.conditional_prob_bounds(l, u, y, 0.01).unwrap();
                assert!(0.0 <= lo && lo <= hi && hi <= 1.0);
            }
        }
    }
}
