//! Optimistic Q-learning over ball partitions of the state-action space.
//!
//! [`Agent::adaptive`] runs the adaptive algorithm: each stage starts from a
//! single ball that is split into an `r/2`-net of its domain once its count
//! reaches `(d_max / r)^2`. [`Agent::uniform`] runs the same update over a
//! fixed net with splitting disabled.

mod grid;
mod tree;
mod uniform;

pub use grid::{WitnessGrid, DEFAULT_GRID_CAP};
pub use tree::{Ball, PartitionReport, PartitionTree, SplitCheck, TieBreak, TreeOptions};
pub use uniform::{build_uniform, run_uniform, UniformPartition};

use std::sync::Arc;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::env::Environment;
use crate::error::{Error, Result};

/// Default split-depth cap: radii never drop below `d_max / 2^10`.
pub const DEFAULT_MAX_DEPTH: u32 = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub horizon: usize,
    pub episodes: usize,
    pub delta: f64,
    pub lipschitz: f64,
    pub d_max: f64,
    pub max_depth: u32,
    #[serde(default)]
    pub tie_break: TieBreak,
    #[serde(default)]
    pub check: SplitCheck,
}

impl AgentConfig {
    /// Configuration matching an environment's horizon, diameter and
    /// Lipschitz hint.
    pub fn for_env(env: &Environment, episodes: usize, delta: f64) -> Self {
        AgentConfig {
            horizon: env.horizon,
            episodes,
            delta,
            lipschitz: env.lipschitz_hint,
            d_max: env.d_max(),
            max_depth: DEFAULT_MAX_DEPTH,
            tie_break: TieBreak::default(),
            check: SplitCheck::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::usage("horizon", "must be at least 1"));
        }
        if self.episodes == 0 {
            return Err(Error::usage("episodes", "must be at least 1"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::usage("delta", format!("{} is outside (0, 1)", self.delta)));
        }
        if !(self.lipschitz >= 0.0 && self.lipschitz.is_finite()) {
            return Err(Error::usage("lipschitz", "must be a finite non-negative number"));
        }
        if !(self.d_max > 0.0 && self.d_max.is_finite()) {
            return Err(Error::usage("d_max", "must be positive"));
        }
        if self.max_depth > 30 {
            return Err(Error::usage("max_depth", "must be at most 30"));
        }
        Ok(())
    }

    /// `log(4HK / delta)`.
    pub fn iota(&self) -> f64 {
        (4.0 * self.horizon as f64 * self.episodes as f64 / self.delta).ln()
    }
}

/// `alpha_t = (H + 1) / (H + t)`.
pub fn learning_rate(t: u64, horizon: usize) -> f64 {
    let h = horizon as f64;
    (h + 1.0) / (h + t as f64)
}

/// `b_t = 2 sqrt(H^3 log(4HK/delta) / t) + 4 L d_max / sqrt(t)`.
pub fn bonus(t: u64, config: &AgentConfig) -> f64 {
    let h = config.horizon as f64;
    let t = t as f64;
    2.0 * (h.powi(3) * config.iota() / t).sqrt() + 4.0 * config.lipschitz * config.d_max / t.sqrt()
}

/// Alg. 1 line 9.
pub fn update_q(q_old: f64, t: u64, reward: f64, v_next: f64, config: &AgentConfig) -> f64 {
    let alpha = learning_rate(t, config.horizon);
    (1.0 - alpha) * q_old + alpha * (reward + bonus(t, config) + v_next)
}

/// One stage of one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub episode: usize,
    pub stage: usize,
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    pub ball: usize,
    pub radius: f64,
    pub depth: u32,
    /// Count of the ball after this visit.
    pub t: u64,
    pub bonus: f64,
    pub q_before: f64,
    pub q_after: f64,
    pub v_next: f64,
    pub reward: f64,
    /// Ids of the children created by a split at this step.
    pub split: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub episode: usize,
    pub initial_state: Vec<f64>,
    pub steps: Vec<StepRecord>,
    pub total_reward: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AgentKind {
    Adaptive,
    Uniform,
}

/// One learner: a partition tree per stage over a shared witness grid.
#[derive(Debug, Clone)]
pub struct Agent {
    pub config: AgentConfig,
    pub kind: AgentKind,
    grid: Arc<WitnessGrid>,
    trees: Vec<PartitionTree>,
}

impl Agent {
    /// Alg. 1 line 1: one root ball with estimate `H` per stage.
    pub fn adaptive(config: AgentConfig, env: &Environment) -> Result<Self> {
        config.validate()?;
        check_env(&config, env)?;
        let grid = Arc::new(WitnessGrid::for_depth(env.metric, env.state_dim, env.action_dim, config.max_depth)?);
        let options = TreeOptions {
            max_depth: config.max_depth,
            splitting: true,
            check: config.check,
            tie_break: config.tie_break,
        };
        let trees = (1..=config.horizon)
            .map(|h| PartitionTree::new(h, grid.clone(), config.horizon as f64, options))
            .collect::<Result<_>>()?;
        Ok(Agent {
            config,
            kind: AgentKind::Adaptive,
            grid,
            trees,
        })
    }

    /// Fixed-net learner over `partition`, with every ball starting at `H`.
    pub fn uniform(config: AgentConfig, env: &Environment, partition: &UniformPartition) -> Result<Self> {
        config.validate()?;
        check_env(&config, env)?;
        let grid = partition.grid.clone();
        if grid.metric != env.metric || grid.state_dim != env.state_dim || grid.action_dim != env.action_dim {
            return Err(Error::invalid("uniform partition was built for a different space"));
        }
        let options = TreeOptions {
            max_depth: partition.depth,
            splitting: false,
            check: config.check,
            tie_break: config.tie_break,
        };
        let centers: Vec<(Vec<f64>, u32)> = partition
            .centers
            .iter()
            .map(|c| (c.clone(), partition.depth))
            .collect();
        let trees = (1..=config.horizon)
            .map(|h| PartitionTree::with_balls(h, grid.clone(), &centers, config.horizon as f64, options))
            .collect::<Result<_>>()?;
        Ok(Agent {
            config,
            kind: AgentKind::Uniform,
            grid,
            trees,
        })
    }

    pub fn grid(&self) -> &WitnessGrid {
        &self.grid
    }

    pub fn trees(&self) -> &[PartitionTree] {
        &self.trees
    }

    /// Tree of stage `h` (1-based).
    pub fn tree(&self, h: usize) -> &PartitionTree {
        &self.trees[h - 1]
    }

    /// One episode of Alg. 1. All randomness comes from `rng`.
    pub fn run_episode(&mut self, env: &Environment, k: usize, rng: &mut dyn RngCore) -> Result<EpisodeLog> {
        let horizon = self.config.horizon;
        let initial_state = env.reset(k);
        let mut x = initial_state.clone();
        let mut steps = Vec::with_capacity(horizon);
        let mut total_reward = 0.0;
        for h in 1..=horizon {
            let s = self.grid.snap_state(&x);
            let tree = &self.trees[h - 1];
            let relevant = tree.relevant(s)?;
            let id = tree.select_ball(&relevant)?;
            let a_idx = tree.choose_action(s, id)?;
            let action = self.grid.action_coords(a_idx);
            let (reward, next) = env.step(h, &x, &action, rng)?;

            let v_next = if h == horizon {
                0.0
            } else {
                let s_next = self.grid.snap_state(&next);
                self.trees[h].estimate_value(s_next, horizon)?
            };
            let tree = &mut self.trees[h - 1];
            let q_before = tree.ball(id).q_value;
            let t = tree.record_visit(id);
            let b_t = bonus(t, &self.config);
            let q_after = update_q(q_before, t, reward, v_next, &self.config);
            tree.set_q(id, q_after);
            let split = if tree.needs_split(id) {
                tree.split(id, k)?
            } else {
                Vec::new()
            };
            let ball = tree.ball(id);
            steps.push(StepRecord {
                episode: k,
                stage: h,
                state: x,
                action,
                ball: id,
                radius: ball.radius,
                depth: ball.depth,
                t,
                bonus: b_t,
                q_before,
                q_after,
                v_next,
                reward,
                split,
            });
            total_reward += reward;
            x = next;
        }
        if self.config.check == SplitCheck::Full {
            for tree in &self.trees {
                let report = tree.audit();
                if !report.ok() {
                    return Err(Error::invariant(format!(
                        "episode {k}: partition audit failed at stage {}: {} uncovered, {} separation, {} stale",
                        tree.stage,
                        report.uncovered,
                        report.separation.len(),
                        report.stale_cells
                    )));
                }
            }
        }
        Ok(EpisodeLog {
            episode: k,
            initial_state,
            steps,
            total_reward,
        })
    }

    /// Episodes `1..=K`.
    pub fn run(&mut self, env: &Environment, rng: &mut dyn RngCore) -> Result<Vec<EpisodeLog>> {
        (1..=self.config.episodes)
            .map(|k| self.run_episode(env, k, rng))
            .collect()
    }
}

fn check_env(config: &AgentConfig, env: &Environment) -> Result<()> {
    if config.horizon != env.horizon {
        return Err(Error::usage(
            "horizon",
            format!("agent horizon {} differs from the environment's {}", config.horizon, env.horizon),
        ));
    }
    if (config.d_max - env.d_max()).abs() > 1e-12 {
        return Err(Error::usage("d_max", "agent diameter differs from the environment metric"));
    }
    Ok(())
}

/// Step records of a run, flattened in episode order.
pub fn steps(logs: &[EpisodeLog]) -> impl Iterator<Item = &StepRecord> {
    logs.iter().flat_map(|l| l.steps.iter())
}
