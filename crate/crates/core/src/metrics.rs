//! Regret bookkeeping, exploration-set sizing and the constants that appear
//! in the regret bound.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{ceil, ceil_tol, ln, powf, powi, sqrt};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryParams {
    pub phi_tilde: f64,
    pub delta: f64,
    pub lambda_tilde: f64,
    pub c: f64,
    pub k_tilde: f64,
}

/// Constants of the exploration-size bound for the given feedback
/// probabilities, search base `φ`, target width `β`, budget `B`, failure
/// level `λ` and exploration size `|L|`.
pub fn theory_params(
    p1: f64,
    p2: f64,
    phi: u32,
    beta: f64,
    budget: u32,
    lambda: f64,
    size_l: usize,
) -> Result<TheoryParams> {
    for (what, v) in [("p1", p1), ("p2", p2), ("beta", beta), ("lambda", lambda)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::Domain { what, value: v });
        }
    }
    if phi < 2 {
        return Err(Error::Domain {
            what: "phi",
            value: phi as f64,
        });
    }
    if budget == 0 {
        return Err(Error::Domain {
            what: "budget",
            value: 0.0,
        });
    }
    if size_l == 0 {
        return Err(Error::InvalidInput("exploration set must be nonempty"));
    }
    let phi_f = phi as f64;
    let phi_tilde = phi_f / (phi_f - 1.0);
    let b = budget as f64;
    let log_phi_tilde = ln(1.0 / beta) / ln(phi_tilde);
    let log_phi = ln(1.0 / beta) / ln(phi_f);
    let num = (1.0 - powi(1.0 - p2, phi + 1)) * log_phi_tilde;
    let den = b * p2 * (1.0 - (p1 + p2) * powi(1.0 - p1.min(p2), phi));
    let delta = num / den;
    let lambda_tilde = sqrt(ln(1.0 / lambda) / (2.0 * delta * delta * size_l as f64));
    let c = (1.0 - delta * (1.0 + lambda_tilde)) / (1.0 - log_phi / b);
    Ok(TheoryParams {
        phi_tilde,
        delta,
        lambda_tilde,
        c,
        k_tilde: c * size_l as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SplitMode {
    /// `⌈N^{2/3}⌉`; needs no knowledge of the feedback probabilities.
    Practical,
    Theory {
        c: f64,
        lambda_tilde: f64,
    },
}

/// Number of exploration users out of `n`, clipped to `[1, n − 1]`.
pub fn split_users(n: usize, budget: u32, epsilon: f64, mode: SplitMode) -> Result<usize> {
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let n23 = powf(n as f64, 2.0 / 3.0);
    let raw = match mode {
        SplitMode::Practical => ceil_tol(n23),
        SplitMode::Theory { c, lambda_tilde } => {
            if !(epsilon > 0.0 && epsilon < 1.0) {
                return Err(Error::Domain {
                    what: "epsilon",
                    value: epsilon,
                });
            }
            if budget == 0 || !(c > 0.0) {
                return Err(Error::InvalidInput("theory split needs B ≥ 1 and c > 0"));
            }
            ceil(
                sqrt(ln(16.0 / epsilon)) * n23 * sqrt(1.0 - lambda_tilde)
                    / (c * powf(budget as f64, 1.0 / 3.0)),
            )
        }
    };
    Ok((raw.max(1.0) as usize).min(n - 1))
}

/// `N·V*_δ − Σ rewards`. May be slightly negative: the δ-policy is itself
/// suboptimal.
pub fn delta_regret(rewards: &[f64], v_star: f64, n: usize) -> f64 {
    n as f64 * v_star - rewards.iter().sum::<f64>()
}

/// Least-squares slope of `ln R` against `ln N`, skipping nonpositive regrets.
pub fn regret_slope(points: &[(f64, f64)]) -> Result<f64> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(n, r)| r > 0.0 && n > 0.0)
        .map(|&(n, r)| (ln(n), ln(r)))
        .collect();
    if logs.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: logs.len(),
        });
    }
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = logs.iter().map(|&(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = logs.iter().map(|&(x, _)| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("regret points need distinct N"));
    }
    Ok(sxy / sxx)
}

/// Rounds of linear search needed to shrink `[0, 1]` below `β`: `⌈log_φ(1/β)⌉`.
pub fn search_rounds(phi: u32, beta: f64) -> u32 {
    if beta >= 1.0 {
        return 0;
    }
    ceil_tol(ln(1.0 / beta) / ln(phi as f64)) as u32
}

/// Upper bound on an exploration episode's length in steps:
/// `(φ + 1)(⌈log_φ(1/β)⌉ + 1)`.
pub fn waiting_time_bound(phi: u32, beta: f64) -> u64 {
    (phi as u64 + 1) * (search_rounds(phi, beta) as u64 + 1)
}

/// Mean and sample standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, sqrt(var))
}
