//! Problem parameterization: rewards, threshold distributions, feedback
//! models and the validated configuration that carries them.

use alloc::vec::Vec;
use core::fmt;

use rand::distributions::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SLOPE_TOL: f64 = 1e-9;

/// A continuous piecewise-linear curve on `[0, 1]` given by its knots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    knots: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    /// Knots must start at x = 0, end at x = 1 and have strictly increasing x.
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidInput(
                "piecewise-linear curve needs at least two knots",
            ));
        }
        if knots[0].0 != 0.0 || knots[knots.len() - 1].0 != 1.0 {
            return Err(Error::InvalidInput(
                "piecewise-linear knots must span [0, 1]",
            ));
        }
        if knots.iter().any(|&(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::InvalidInput("piecewise-linear knots must be finite"));
        }
        if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidInput(
                "piecewise-linear knot x must strictly increase",
            ));
        }
        Ok(Self { knots })
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k = &self.knots;
        // first knot with x_i >= x
        let i = k.partition_point(|&(kx, _)| kx < x);
        if i == 0 {
            return k[0].1;
        }
        if i == k.len() {
            return k[k.len() - 1].1;
        }
        if k[i].0 == x {
            return k[i].1;
        }
        let (x0, y0) = k[i - 1];
        let (x1, y1) = k[i];
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    /// Inverse of a strictly increasing curve.
    pub fn inverse(&self, y: f64) -> f64 {
        let k = &self.knots;
        let i = k.partition_point(|&(_, ky)| ky < y);
        if i == 0 {
            return k[0].0;
        }
        if i == k.len() {
            return k[k.len() - 1].0;
        }
        let (x0, y0) = k[i - 1];
        let (x1, y1) = k[i];
        x0 + (x1 - x0) * (y - y0) / (y1 - y0)
    }

    pub fn slopes(&self) -> impl Iterator<Item = f64> + '_ {
        self.knots
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RewardShape {
    /// `r(y) = intercept + slope·y`
    Linear {
        slope: f64,
        intercept: f64,
    },
    Piecewise(PiecewiseLinear),
}

/// Nondecreasing reward `r(y)` on `[0, 1]` with a declared Lipschitz constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardFunction {
    pub shape: RewardShape,
    pub lipschitz: f64,
}

impl RewardFunction {
    pub fn linear(slope: f64) -> Self {
        Self {
            shape: RewardShape::Linear {
                slope,
                intercept: 0.0,
            },
            lipschitz: slope,
        }
    }

    pub fn piecewise(knots: Vec<(f64, f64)>, lipschitz: f64) -> Result<Self> {
        Ok(Self {
            shape: RewardShape::Piecewise(PiecewiseLinear::new(knots)?),
            lipschitz,
        })
    }

    pub fn eval(&self, y: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&y) {
            return Err(Error::Domain {
                what: "action",
                value: y,
            });
        }
        Ok(self.value(y))
    }

    /// Unchecked evaluation for callers that already hold a valid action.
    #[inline]
    pub fn value(&self, y: f64) -> f64 {
        match &self.shape {
            RewardShape::Linear { slope, intercept } => intercept + slope * y,
            RewardShape::Piecewise(c) => c.eval(y),
        }
    }

    pub fn max_value(&self) -> f64 {
        self.value(1.0)
    }

    fn issues(&self, out: &mut Vec<ConfigIssue>) {
        if !(self.lipschitz >= 0.0) {
            out.push(ConfigIssue::RewardLipschitz);
        }
        match &self.shape {
            RewardShape::Linear { slope, intercept } => {
                if *slope < 0.0 {
                    out.push(ConfigIssue::RewardDecreasing);
                }
                if *intercept < 0.0 || (*intercept == 0.0 && *slope <= 0.0) {
                    out.push(ConfigIssue::RewardNotPositive);
                }
                if *slope > self.lipschitz + SLOPE_TOL {
                    out.push(ConfigIssue::RewardLipschitz);
                }
            }
            RewardShape::Piecewise(c) => {
                let first = c.knots()[0].1;
                if c.slopes().any(|s| s < 0.0) {
                    out.push(ConfigIssue::RewardDecreasing);
                }
                let first_slope = c.slopes().next().unwrap_or(0.0);
                if first < 0.0 || (first == 0.0 && first_slope <= 0.0) {
                    out.push(ConfigIssue::RewardNotPositive);
                }
                if c.slopes().any(|s| s > self.lipschitz + SLOPE_TOL) {
                    out.push(ConfigIssue::RewardLipschitz);
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DistributionShape {
    Uniform,
    /// CDF knots from `(0, 0)` to `(1, 1)`.
    Piecewise(PiecewiseLinear),
}

/// Threshold CDF `F` with declared bounds `L_c(y−x) ≤ F(y)−F(x) ≤ L_h(y−x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdDistribution {
    pub shape: DistributionShape,
    pub l_c: f64,
    pub l_h: f64,
}

impl ThresholdDistribution {
    pub fn uniform() -> Self {
        Self {
            shape: DistributionShape::Uniform,
            l_c: 1.0,
            l_h: 1.0,
        }
    }

    pub fn piecewise(knots: Vec<(f64, f64)>, l_c: f64, l_h: f64) -> Result<Self> {
        Ok(Self {
            shape: DistributionShape::Piecewise(PiecewiseLinear::new(knots)?),
            l_c,
            l_h,
        })
    }

    pub fn eval_cdf(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain {
                what: "cdf argument",
                value: x,
            });
        }
        Ok(self.cdf(x))
    }

    #[inline]
    pub fn cdf(&self, x: f64) -> f64 {
        match &self.shape {
            DistributionShape::Uniform => x.clamp(0.0, 1.0),
            DistributionShape::Piecewise(c) => c.eval(x),
        }
    }

    pub fn quantile(&self, q: f64) -> f64 {
        match &self.shape {
            DistributionShape::Uniform => q,
            DistributionShape::Piecewise(c) => c.inverse(q),
        }
    }

    /// Inverse-CDF draw; the quantile is taken from the open interval (0, 1).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let q: f64 = rng.sample(Open01);
        let theta = self.quantile(q);
        // Rounding in the inverse can land on an endpoint; nudge back inside.
        theta.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON)
    }

    fn issues(&self, out: &mut Vec<ConfigIssue>) {
        if !(self.l_c > 0.0) || !(self.l_h >= self.l_c) {
            out.push(ConfigIssue::DistributionLipschitz);
            return;
        }
        match &self.shape {
            DistributionShape::Uniform => {
                if self.l_c > 1.0 + SLOPE_TOL || self.l_h < 1.0 - SLOPE_TOL {
                    out.push(ConfigIssue::DistributionLipschitz);
                }
            }
            DistributionShape::Piecewise(c) => {
                let k = c.knots();
                if k[0].1 != 0.0 || k[k.len() - 1].1 != 1.0 {
                    out.push(ConfigIssue::DistributionEndpoints);
                }
                if c.slopes()
                    .any(|s| s < self.l_c - SLOPE_TOL || s > self.l_h + SLOPE_TOL)
                {
                    out.push(ConfigIssue::DistributionLipschitz);
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeedbackMode {
    Hard,
    Soft,
}

/// Feedback reveal probabilities. Hard mode reveals every signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeedbackModel {
    pub mode: FeedbackMode,
    pub p1: f64,
    pub p2: f64,
}

impl FeedbackModel {
    pub fn hard() -> Self {
        Self {
            mode: FeedbackMode::Hard,
            p1: 1.0,
            p2: 1.0,
        }
    }

    pub fn soft(p1: f64, p2: f64) -> Self {
        Self {
            mode: FeedbackMode::Soft,
            p1,
            p2,
        }
    }

    /// Probability that a below-threshold action reports positive feedback.
    pub fn positive_prob(&self) -> f64 {
        match self.mode {
            FeedbackMode::Hard => 1.0,
            FeedbackMode::Soft => self.p1,
        }
    }

    /// Probability that an above-threshold action reports negative feedback.
    pub fn negative_prob(&self) -> f64 {
        match self.mode {
            FeedbackMode::Hard => 1.0,
            FeedbackMode::Soft => self.p2,
        }
    }

    /// A probability of one never touches the stream, so hard mode and
    /// soft mode with `p1 = p2 = 1` produce identical trajectories.
    pub(crate) fn reveal<R: Rng + ?Sized>(p: f64, rng: &mut R) -> bool {
        p >= 1.0 || rng.gen::<f64>() < p
    }
}

/// Exploration stopping width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Beta {
    Fixed(f64),
    /// `max(η_|L| / (2 L_h), φ^{-B})`, capped at 1; resolved per run from
    /// the planned exploration size.
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub reward: RewardFunction,
    pub distribution: ThresholdDistribution,
    pub feedback: FeedbackModel,
    pub gamma: f64,
    pub budget: u32,
    pub delta: f64,
    pub beta: Beta,
    pub phi: u32,
    pub epsilon: f64,
    pub grid_m: usize,
    pub seed: u64,
    /// Multiplier on the confidence radius of the conditional-probability
    /// bounds; 1 is the plain bound, 0 the plug-in estimate.
    pub radius_scale: f64,
    /// Step cap for exploitation and oracle episodes. Truncating at `H`
    /// loses at most `γ^H · r(1) / (1 − γ)`.
    pub horizon: u32,
}

impl ModelConfig {
    /// `r(y) = 5y`, uniform thresholds, `γ = 0.95`, `δ = 0.01`, `φ = 2`,
    /// hard feedback, plug-in probability bounds (`radius_scale = 0`): the
    /// plain radius exceeds 1 at any population size a desk run can reach.
    pub fn numerical_setup(budget: u32) -> Self {
        Self {
            reward: RewardFunction::linear(5.0),
            distribution: ThresholdDistribution::uniform(),
            feedback: FeedbackModel::hard(),
            gamma: 0.95,
            budget,
            delta: 0.01,
            beta: Beta::Auto,
            phi: 2,
            epsilon: 0.1,
            grid_m: 201,
            seed: 0,
            radius_scale: 0.0,
            horizon: 100_000,
        }
    }

    pub fn validate(&self) -> Validation {
        let mut violations = Vec::new();
        let mut warnings = Vec::new();
        self.reward.issues(&mut violations);
        self.distribution.issues(&mut violations);
        if !(self.gamma < 1.0) {
            violations.push(ConfigIssue::GammaTooLarge);
        }
        if !(self.gamma >= 0.0) {
            violations.push(ConfigIssue::GammaNegative);
        }
        if !(0.0..1.0).contains(&self.delta) {
            violations.push(ConfigIssue::Delta);
        }
        if let Beta::Fixed(b) = self.beta {
            if !(b > 0.0 && b < 1.0) {
                violations.push(ConfigIssue::Beta);
            }
        }
        if self.phi < 2 {
            violations.push(ConfigIssue::Phi);
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            violations.push(ConfigIssue::Epsilon);
        }
        if self.grid_m < 2 {
            violations.push(ConfigIssue::GridSize);
        }
        if !(self.radius_scale >= 0.0) {
            violations.push(ConfigIssue::RadiusScale);
        }
        if self.horizon == 0 {
            violations.push(ConfigIssue::Horizon);
        }
        let fb = self.feedback;
        for p in [fb.p1, fb.p2] {
            if !(p > 0.0 && p <= 1.0) {
                violations.push(ConfigIssue::FeedbackProbability);
            }
        }
        if fb.mode == FeedbackMode::Soft && fb.p1 + fb.p2 >= 1.0 {
            warnings.push(ConfigIssue::FeedbackSumAtLeastOne);
        }
        Validation {
            violations,
            warnings,
        }
    }

    /// Validates and returns the warnings, or every violation as an error.
    pub fn checked(&self) -> Result<Vec<ConfigIssue>> {
        let v = self.validate();
        if v.violations.is_empty() {
            Ok(v.warnings)
        } else {
            Err(Error::InvalidConfig(v.violations))
        }
    }

    /// Stable FNV-1a digest of the parameters that shape a value table.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Fnv::default();
        match &self.reward.shape {
            RewardShape::Linear { slope, intercept } => {
                h.byte(0);
                h.f64(*slope);
                h.f64(*intercept);
            }
            RewardShape::Piecewise(c) => {
                h.byte(1);
                c.knots().iter().for_each(|&(x, y)| {
                    h.f64(x);
                    h.f64(y);
                });
            }
        }
        match &self.distribution.shape {
            DistributionShape::Uniform => h.byte(0),
            DistributionShape::Piecewise(c) => {
                h.byte(1);
                c.knots().iter().for_each(|&(x, y)| {
                    h.f64(x);
                    h.f64(y);
                });
            }
        }
        h.byte(self.feedback.mode as u8);
        h.f64(self.feedback.positive_prob());
        h.f64(self.feedback.negative_prob());
        h.f64(self.gamma);
        h.u64(self.budget as u64);
        h.f64(self.delta);
        h.u64(self.grid_m as u64);
        h.finish()
    }
}

#[derive(Default)]
struct Fnv(u64);

impl Fnv {
    fn byte(&mut self, b: u8) {
        if self.0 == 0 {
            self.0 = 0xcbf2_9ce4_8422_2325;
        }
        self.0 ^= b as u64;
        self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
    }
    fn u64(&mut self, v: u64) {
        v.to_le_bytes().iter().for_each(|&b| self.byte(b));
    }
    fn f64(&mut self, v: f64) {
        self.u64(v.to_bits());
    }
    fn finish(&self) -> u64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConfigIssue {
    RewardDecreasing,
    RewardNotPositive,
    RewardLipschitz,
    DistributionEndpoints,
    DistributionLipschitz,
    GammaTooLarge,
    GammaNegative,
    Delta,
    Beta,
    Phi,
    Epsilon,
    GridSize,
    FeedbackProbability,
    FeedbackSumAtLeastOne,
    RadiusScale,
    Horizon,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = match self {
            ConfigIssue::RewardDecreasing => "reward must be nondecreasing",
            ConfigIssue::RewardNotPositive => "reward must be positive for y > 0",
            ConfigIssue::RewardLipschitz => "reward slope exceeds declared L_r",
            ConfigIssue::DistributionEndpoints => "threshold CDF must run from F(0)=0 to F(1)=1",
            ConfigIssue::DistributionLipschitz => {
                "threshold CDF slopes must lie in [L_c, L_h] with L_h ≥ L_c > 0"
            }
            ConfigIssue::GammaTooLarge => "γ must be < 1",
            ConfigIssue::GammaNegative => "γ must be ≥ 0",
            ConfigIssue::Delta => "δ must lie in [0, 1)",
            ConfigIssue::Beta => "β must lie in (0, 1)",
            ConfigIssue::Phi => "φ must be ≥ 2",
            ConfigIssue::Epsilon => "ε must lie in (0, 1)",
            ConfigIssue::GridSize => "grid resolution M must be ≥ 2",
            ConfigIssue::FeedbackProbability => "feedback probabilities must lie in (0, 1]",
            ConfigIssue::FeedbackSumAtLeastOne => {
                "p1 + p2 ≥ 1: soft-feedback regret guarantee does not apply"
            }
            ConfigIssue::RadiusScale => "radius scale must be ≥ 0",
            ConfigIssue::Horizon => "horizon must be ≥ 1",
        };
        f.write_str(msg)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Validation {
    pub violations: Vec<ConfigIssue>,
    pub warnings: Vec<ConfigIssue>,
}

impl Validation {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::env_stream;
    use alloc::vec;
    use proptest::prelude::*;

    fn skewed() -> ThresholdDistribution {
        ThresholdDistribution::piecewise(vec![(0.0, 0.0), (0.5, 0.8), (1.0, 1.0)], 0.4, 1.6)
            .unwrap()
    }

    #[test]
    fn linear_reward_values() {
        let r = RewardFunction::linear(5.0);
        assert!((r.eval(0.3).unwrap() - 1.5).abs() < 1e-12);
        assert_eq!(r.eval(0.0).unwrap(), 0.0);
        assert_eq!(r.eval(1.0).unwrap(), 5.0);
        assert!(matches!(r.eval(1.2), Err(Error::Domain { .. })));
        assert!(matches!(r.eval(-0.1), Err(Error::Domain { .. })));
    }

    #[test]
    fn cdf_values() {
        let u = ThresholdDistribution::uniform();
        assert_eq!(u.eval_cdf(0.3).unwrap(), 0.3);
        assert_eq!(u.eval_cdf(1.0).unwrap(), 1.0);
        assert!(u.eval_cdf(1.5).is_err());
        // interpolation between (0,0) and (0.5,0.8)
        let expected = 0.0 + (0.8 - 0.0) * (0.25 - 0.0) / (0.5 - 0.0);
        assert!((skewed().eval_cdf(0.25).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 0.4).abs() < 1e-12);
    }

    #[test]
    fn quantile_inverts_cdf() {
        let d = skewed();
        for i in 1..100 {
            let q = i as f64 / 100.0;
            assert!((d.cdf(d.quantile(q)) - q).abs() < 1e-12);
        }
        assert_eq!(ThresholdDistribution::uniform().quantile(0.5), 0.5);
    }

    #[test]
    fn cdf_monotone_on_fine_grid() {
        for d in [ThresholdDistribution::uniform(), skewed()] {
            let mut prev = 0.0;
            for i in 0..=1000 {
                let v = d.cdf(i as f64 / 1000.0);
                assert!(v >= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn lipschitz_sandwich_on_grid() {
        for d in [ThresholdDistribution::uniform(), skewed()] {
            for i in 0..1000 {
                let (x, y) = (i as f64 / 1000.0, (i + 1) as f64 / 1000.0);
                let diff = d.cdf(y) - d.cdf(x);
                assert!(diff >= d.l_c * (y - x) - 1e-12);
                assert!(diff <= d.l_h * (y - x) + 1e-12);
            }
        }
    }

    #[test]
    fn samples_are_interior_and_reproducible() {
        let d = skewed();
        let mut a = env_stream(11, 0);
        let mut b = env_stream(11, 0);
        for _ in 0..10_000 {
            let x = d.sample(&mut a);
            assert!(x > 0.0 && x < 1.0);
            assert_eq!(x.to_bits(), d.sample(&mut b).to_bits());
        }
    }

    #[test]
    fn uniform_samples_within_dkw_band() {
        let n = 100_000usize;
        let d = ThresholdDistribution::uniform();
        let mut rng = env_stream(2024, 0);
        let mut xs: Vec<f64> = (0..n).map(|_| d.sample(&mut rng)).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let band = libm::sqrt(libm::log(2.0 / 0.01) / (2.0 * n as f64));
        let mut sup: f64 = 0.0;
        for (i, &x) in xs.iter().enumerate() {
            let lo = i as f64 / n as f64;
            let hi = (i + 1) as f64 / n as f64;
            sup = sup.max((x - lo).abs()).max((hi - x).abs());
        }
        assert!(sup <= band, "sup {sup} band {band}");
    }

    #[test]
    fn validation_paths() {
        let mut cfg = ModelConfig::numerical_setup(5);
        assert!(cfg.validate().is_ok());

        cfg.gamma = 1.0;
        let v = cfg.validate();
        assert_eq!(v.violations, vec![ConfigIssue::GammaTooLarge]);
        assert_eq!(alloc::format!("{}", v.violations[0]), "γ must be < 1");

        let mut cfg = ModelConfig::numerical_setup(0);
        assert!(cfg.validate().is_ok());
        cfg.feedback = FeedbackModel::soft(0.6, 0.6);
        let v = cfg.validate();
        assert!(v.is_ok());
        assert_eq!(v.warnings, vec![ConfigIssue::FeedbackSumAtLeastOne]);

        cfg.feedback = FeedbackModel::soft(0.3, 0.3);
        assert!(cfg.validate().warnings.is_empty());
    }

    #[test]
    fn validation_collects_every_violation() {
        let mut cfg = ModelConfig::numerical_setup(2);
        cfg.phi = 1;
        cfg.grid_m = 1;
        cfg.beta = Beta::Fixed(0.0);
        cfg.delta = 1.0;
        cfg.epsilon = 0.0;
        cfg.reward.lipschitz = 1.0;
        let v = cfg.validate();
        for issue in [
            ConfigIssue::Phi,
            ConfigIssue::GridSize,
            ConfigIssue::Beta,
            ConfigIssue::Delta,
            ConfigIssue::Epsilon,
            ConfigIssue::RewardLipschitz,
        ] {
            assert!(v.violations.contains(&issue), "{issue:?} missing");
        }
        assert!(cfg.checked().is_err());
    }

    #[test]
    fn declared_constants_are_verified() {
        let mut cfg = ModelConfig::numerical_setup(2);
        cfg.distribution =
            ThresholdDistribution::piecewise(vec![(0.0, 0.0), (0.5, 0.8), (1.0, 1.0)], 0.5, 1.6)
                .unwrap();
        assert!(cfg
            .validate()
            .violations
            .contains(&ConfigIssue::DistributionLipschitz));
        cfg.distribution = skewed();
        assert!(cfg.validate().is_ok());
        cfg.reward =
            RewardFunction::piecewise(vec![(0.0, 0.0), (0.5, 1.0), (1.0, 0.5)], 2.0).unwrap();
        assert!(cfg
            .validate()
            .violations
            .contains(&ConfigIssue::RewardDecreasing));
    }

    proptest! {
        #[test]
        fn piecewise_cdf_is_monotone(a in 0.05f64..0.95, b in 0.05f64..0.95, x in 0.0f64..1.0, y in 0.0f64..1.0) {
            let d = ThresholdDistribution::piecewise(vec![(0.0, 0.0), (a, b), (1.0, 1.0)], 0.01, 100.0).unwrap();
            let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
            prop_assert!(d.cdf(lo) <= d.cdf(hi));
        }
    }
}
