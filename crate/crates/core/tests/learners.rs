//! Exploration, estimation and exploitation working together.

use bandit_lab_core::env::{Environment, Feedback, User};
use bandit_lab_core::estimate::{survivor_count, EstimateSet};
use bandit_lab_core::explore::explore_user;
use bandit_lab_core::metrics::{search_rounds, waiting_time_bound};
use bandit_lab_core::model::{Beta, FeedbackModel, ModelConfig};
use bandit_lab_core::oracle;
use bandit_lab_core::pipeline::{explore_population, run_pipeline, Algo};
use bandit_lab_core::rng::derive_seed;

#[test]
fn hard_search_halves_and_never_abandons() {
    for beta in [0.25, 0.05] {
        let j_max = search_rounds(2, beta) + 1;
        let budget = j_max;
        let mut cfg = ModelConfig::numerical_setup(budget);
        cfg.beta = Beta::Fixed(beta);
        let env = Environment::new(&cfg);
        for k in 1..=19 {
            let theta = k as f64 * 0.05;
            let mut session = env.session(User::with_threshold(k, theta, budget, 0));
            let log = explore_user(&mut session, k, beta, cfg.gamma, 2).unwrap();
            assert!(!log.abandoned, "θ={theta} β={beta}");
            assert!(log.rounds <= j_max);
            assert!(log.interval.lower <= theta && theta <= log.interval.upper);
            assert!(log.len() as u64 <= waiting_time_bound(2, beta));
            // Every completed round halves the width exactly at φ = 2.
            let expected = 0.5f64.powi(log.rounds as i32);
            assert!(log.interval.width() <= expected + 1e-12);
        }
    }
}

#[test]
fn soft_pipeline_runs_and_beats_baseline() {
    let mut cfg = ModelConfig::numerical_setup(4);
    cfg.grid_m = 101;
    cfg.delta = 0.02;
    cfg.feedback = FeedbackModel::soft(0.7, 0.7);
    let table = oracle::solve(&cfg).unwrap();
    let mut sf = 0.0;
    let mut sl = 0.0;
    for run in 0..5 {
        let seed = derive_seed(3, run);
        let a = run_pipeline(&cfg, Algo::UcbPviSf, 2000, seed, &table).unwrap();
        assert!(a.k > 0 && a.k <= a.size_l);
        assert!(0.0 <= a.beta && a.beta <= 1.0);
        sf += a.total_reward;
        sl += run_pipeline(&cfg, Algo::Sl, 2000, seed, &table)
            .unwrap()
            .total_reward;
    }
    assert!(sf > sl, "{sf} vs {sl}");
}

#[test]
fn hard_feedback_estimates_are_exact_signals() {
    let mut cfg = ModelConfig::numerical_setup(4);
    cfg.beta = Beta::Fixed(0.0625);
    let env = Environment::with_seed(&cfg, 8);
    let logs = explore_population(&env, 500, 0.0625, 2);
    assert_eq!(survivor_count(&logs, 0.0625), 500);
    let est = EstimateSet::from_logs(&logs, 0.0625, &cfg).unwrap();
    assert_eq!((est.p1_hat, est.p2_hat), (1.0, 1.0));
    // Survivors bracket θ within β, so the ECDF of lower bounds lies
    // between F(x) and F(x + β) up to sampling noise.
    let slack = 2.0 * (f64::ln(2.0 / 1e-3) / (2.0 * 500.0)).sqrt();
    for i in 0..=20 {
        let x = i as f64 / 20.0;
        let f = est.cdf(x);
        assert!(
            f + slack >= x && f <= (x + 0.0625).min(1.0) + slack,
            "x={x} F̂={f}"
        );
    }
    assert!(logs
        .iter()
        .all(|l| l.steps.iter().all(|s| s.feedback != Feedback::None)));
}

#[test]
fn exploitation_reward_is_bounded_by_perfect_information() {
    // No policy can beat knowing θ: r(θ)/(1−γ) for every user.
    let cfg = ModelConfig::numerical_setup(4);
    let table = oracle::solve(&cfg).unwrap();
    let rep = run_pipeline(&cfg, Algo::UcbPviHf, 1000, 4, &table).unwrap();
    let env = Environment::with_seed(&cfg, 4);
    for (i, r) in rep.rewards.iter().enumerate() {
        let theta = env.spawn_user(i as u64).threshold();
        assert!(*r <= cfg.reward.value(theta) / (1.0 - cfg.gamma) + 1e-9);
    }
}
