use std::collections::HashMap;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use zooming_q::agent::{
    bonus, learning_rate, steps, update_q, Agent, AgentConfig, EpisodeLog, SplitCheck, TieBreak,
};
use zooming_q::diagnostics::check_counts;
use zooming_q::env::{Environment, InitialStates, Kernel};
use zooming_q::metric::{MetricKind, MetricSpec};

fn config(h: usize, k: usize, delta: f64, l: f64) -> AgentConfig {
    AgentConfig {
        horizon: h,
        episodes: k,
        delta,
        lipschitz: l,
        d_max: 1.0,
        max_depth: 10,
        tie_break: TieBreak::FinerFirst,
        check: SplitCheck::Incremental,
    }
}

#[test]
fn learning_rate_examples() {
    for h in [1, 2, 5] {
        assert_eq!(learning_rate(1, h), 1.0);
    }
    assert_eq!(learning_rate(5, 3), 0.5);
    for t in 1..100 {
        assert!(learning_rate(t + 1, 4) < learning_rate(t, 4));
    }
}

#[test]
fn bonus_examples() {
    let cfg = config(2, 4, 0.5, 1.0);
    assert!((bonus(1, &cfg) - 15.536215092807064).abs() < 1e-12);
    let flat = config(3, 100, 0.1, 0.0);
    let expected = 2.0 * (27.0 * (1200.0f64 / 0.1).ln() / 9.0).sqrt();
    assert!((bonus(9, &flat) - expected).abs() < 1e-12);
    for t in [1, 3, 17, 250] {
        assert!((bonus(4 * t, &cfg) - bonus(t, &cfg) / 2.0).abs() < 1e-12);
    }
}

#[test]
fn update_arithmetic() {
    let cfg = config(1, 10, 0.5, 0.0);
    let q = update_q(2.0, 1, 1.0, 1.5, &cfg);
    assert_eq!(q, 1.0 + bonus(1, &cfg) + 1.5, "alpha_1 = 1 erases the prior");
    let q = update_q(123.0, 1, 1.0, 1.5, &cfg);
    assert_eq!(q, 1.0 + bonus(1, &cfg) + 1.5);
    let alpha = learning_rate(3, 1);
    assert_eq!(alpha, 0.5);
    let q = update_q(2.0, 3, 1.0, 1.5, &cfg);
    assert!((q - ((1.0 - alpha) * 2.0 + alpha * (1.0 + bonus(3, &cfg) + 1.5))).abs() < 1e-12);
    // The worked example: q_old = 2, alpha = 0.5, r = 1, b = 0.3, V = 1.5.
    assert!(((1.0 - alpha) * 2.0 + alpha * (1.0 + 0.3 + 1.5) - 2.4).abs() < 1e-12);
}

#[test]
fn single_bandit_episode_splits_the_root() {
    let env = Environment::by_name("line-bandit", None, 1).unwrap();
    let cfg = AgentConfig::for_env(&env, 1, 0.05);
    let mut agent = Agent::adaptive(cfg, &env).unwrap();
    let logs = agent.run(&env, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    assert_eq!(logs.len(), 1);
    let step = &logs[0].steps[0];
    assert_eq!(step.ball, 0);
    assert_eq!(step.t, 1);
    assert_eq!(step.v_next, 0.0);
    assert_eq!(step.action, vec![0.5]);
    assert!(!step.split.is_empty());
    let root = agent.tree(1).ball(0);
    assert!(!root.active);
    assert_eq!(root.selections, 1);
    assert_eq!(step.split, root.children);
}

fn toy_env() -> Environment {
    Environment::new(
        "toy",
        2,
        MetricSpec::unit_box(MetricKind::ProductMax, 1, 1),
        1,
        1,
        0.0,
        InitialStates::Fixed(vec![0.2]),
        Arc::new(|_, _, a| a[0]),
        Kernel::Deterministic(Arc::new(|_, _, a| a.to_vec())),
    )
    .unwrap()
}

/// Alg. 1 traced by hand on `r(x, a) = a`, `x' = a`, `x_1 = 0.2`, with
/// `H = 2`, `K = 3`, `delta = 0.5`, `L = 0` and a depth cap of 1 (witness
/// grid spacing 0.25).
#[test]
fn two_stage_three_episode_trace_matches_hand_simulation() {
    let env = toy_env();
    let mut cfg = config(2, 3, 0.5, 0.0);
    cfg.max_depth = 1;
    cfg.check = SplitCheck::Full;
    let mut agent = Agent::adaptive(cfg, &env).unwrap();
    let logs = agent.run(&env, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();

    let iota = (4.0 * 2.0 * 3.0 / 0.5f64).ln();
    let b = |t: f64| 2.0 * (8.0 * iota / t).sqrt();
    let (b1, b2) = (b(1.0), b(2.0));
    // Root split order on the 5 x 5 grid, as (state, action) centers.
    let children = [
        (0.0, 0.0),
        (0.0, 1.0),
        (1.0, 0.0),
        (1.0, 1.0),
        (0.0, 0.5),
        (0.5, 0.0),
        (0.5, 0.5),
        (0.5, 1.0),
        (1.0, 0.5),
    ];
    for tree in agent.trees() {
        let got: Vec<(f64, f64)> = tree.ball(0).children.iter().map(|&c| {
            let p = &tree.ball(c).center;
            (p.state[0], p.action[0])
        }).collect();
        assert_eq!(got, children);
    }

    // (episode, stage, state, action, ball, t, q_before, q_after, v_next, reward)
    let q1_root = 0.5 + b1 + 2.0;
    let q2_root = 0.5 + b1;
    let expected = [
        (1, 1, 0.2, 0.5, 0, 1, 2.0, q1_root, 2.0, 0.5),
        (1, 2, 0.5, 0.5, 0, 1, 2.0, q2_root, 0.0, 0.5),
        (2, 1, 0.2, 0.0, 1, 2, q1_root, 0.25 * q1_root + 0.75 * (b2 + 2.0), 2.0, 0.0),
        (2, 2, 0.0, 0.0, 1, 2, q2_root, 0.25 * q2_root + 0.75 * b2, 0.0, 0.0),
        (3, 1, 0.2, 1.0, 2, 2, q1_root, 0.25 * q1_root + 0.75 * (1.0 + b2 + 2.0), 2.0, 1.0),
        (3, 2, 1.0, 0.0, 3, 2, q2_root, 0.25 * q2_root + 0.75 * b2, 0.0, 0.0),
    ];
    let got: Vec<_> = steps(&logs).collect();
    assert_eq!(got.len(), expected.len());
    for (s, e) in got.iter().zip(expected) {
        let ctx = format!("episode {} stage {}", e.0, e.1);
        assert_eq!((s.episode, s.stage), (e.0, e.1), "{ctx}");
        assert_eq!(s.state, vec![e.2], "{ctx}");
        assert_eq!(s.action, vec![e.3], "{ctx}");
        assert_eq!(s.ball, e.4, "{ctx}");
        assert_eq!(s.t, e.5, "{ctx}");
        assert!((s.q_before - e.6).abs() < 1e-12, "{ctx}: q_before {} vs {}", s.q_before, e.6);
        assert!((s.q_after - e.7).abs() < 1e-12, "{ctx}: q_after {} vs {}", s.q_after, e.7);
        assert_eq!(s.v_next, e.8, "{ctx}");
        assert_eq!(s.reward, e.9, "{ctx}");
        let split_expected: Vec<usize> = if e.0 == 1 { (1..=9).collect() } else { Vec::new() };
        assert_eq!(s.split, split_expected, "{ctx}");
    }
    let totals: Vec<f64> = logs.iter().map(|l| l.total_reward).collect();
    assert_eq!(totals, vec![1.0, 0.0, 1.0]);
}

fn run_band(seed: u64, k: usize) -> (Agent, Vec<EpisodeLog>) {
    let env = Environment::by_name("band-mdp", None, seed).unwrap();
    let cfg = AgentConfig::for_env(&env, k, 0.05);
    let mut agent = Agent::adaptive(cfg, &env).unwrap();
    let logs = agent.run(&env, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
    (agent, logs)
}

#[test]
fn fixed_seed_runs_are_identical() {
    let (_, a) = run_band(5, 100);
    let (_, b) = run_band(5, 100);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let (_, c) = run_band(6, 100);
    assert_ne!(a, c);
}

#[test]
fn logged_updates_replay_bit_for_bit() {
    let (agent, logs) = run_band(2, 400);
    let cfg = &agent.config;
    // Estimates per (stage, ball), seeded by the initial H and by splits.
    let mut q: HashMap<(usize, usize), f64> = HashMap::new();
    for h in 1..=cfg.horizon {
        q.insert((h, 0), cfg.horizon as f64);
    }
    for step in steps(&logs) {
        let key = (step.stage, step.ball);
        assert_eq!(q[&key].to_bits(), step.q_before.to_bits(), "episode {} stage {}", step.episode, step.stage);
        let replay = update_q(step.q_before, step.t, step.reward, step.v_next, cfg);
        assert_eq!(replay.to_bits(), step.q_after.to_bits());
        assert_eq!(bonus(step.t, cfg).to_bits(), step.bonus.to_bits());
        q.insert(key, replay);
        for &child in &step.split {
            q.insert((step.stage, child), replay);
        }
    }
    for tree in agent.trees() {
        for b in tree.balls() {
            assert_eq!(q[&(tree.stage, b.id)].to_bits(), b.q_value.to_bits());
        }
    }
    assert!(check_counts(agent.trees()).ok());
}

#[test]
fn terminal_stage_has_no_continuation() {
    let (_, logs) = run_band(3, 50);
    for step in steps(&logs) {
        if step.stage == 3 {
            assert_eq!(step.v_next, 0.0);
        } else {
            assert!((0.0..=3.0).contains(&step.v_next));
        }
    }
}

#[test]
fn config_validation_names_fields() {
    let env = Environment::by_name("band-mdp", None, 1).unwrap();
    let mut cfg = AgentConfig::for_env(&env, 10, 0.05);
    cfg.delta = 1.5;
    match Agent::adaptive(cfg, &env) {
        Err(zooming_q::Error::Usage { field, .. }) => assert_eq!(field, "delta"),
        other => panic!("expected a usage error, got {other:?}"),
    }
    let mut cfg = AgentConfig::for_env(&env, 10, 0.05);
    cfg.horizon = 2;
    assert!(matches!(Agent::adaptive(cfg, &env), Err(zooming_q::Error::Usage { .. })));
}
