//! Finite-horizon environments over the unit box, and their grid oracles.

mod bench;
mod oracle;

pub use bench::{SHIPPED, band_optimal_action};
pub use oracle::{LipschitzEstimate, OracleTables, DEFAULT_ORACLE_CAP};

use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::MetricSpec;

/// `r_h(x, a)`; stages are 1-based.
pub type RewardFn = Arc<dyn Fn(usize, &[f64], &[f64]) -> f64 + Send + Sync>;
/// Deterministic part of a transition, `(h, x, a) -> x'`.
pub type DriftFn = Arc<dyn Fn(usize, &[f64], &[f64]) -> Vec<f64> + Send + Sync>;
/// Fully general sampled transition.
pub type SamplerFn = Arc<dyn Fn(usize, &[f64], &[f64], &mut dyn RngCore) -> Vec<f64> + Send + Sync>;

/// Transition kernel.
#[derive(Clone)]
pub enum Kernel {
    Deterministic(DriftFn),
    /// `x' = clamp(mean(h,x,a) + U(-width/2, width/2))`, independently per
    /// coordinate. The oracle integrates this exactly.
    UniformNoise { mean: DriftFn, width: f64 },
    /// Arbitrary sampler; the oracle falls back to a fixed-seed Monte Carlo
    /// average over `samples` draws.
    Sampled { sampler: SamplerFn, samples: usize },
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kernel::Deterministic(_) => f.write_str("Deterministic"),
            Kernel::UniformNoise { width, .. } => write!(f, "UniformNoise(width={width})"),
            Kernel::Sampled { samples, .. } => write!(f, "Sampled(samples={samples})"),
        }
    }
}

/// Script producing `x_1^k` for each episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialStates {
    Fixed(Vec<f64>),
    /// One-dimensional linear sweep: episode 1 starts at 0 and episode
    /// `episodes` at 1.
    Sweep { episodes: usize },
    /// Precomputed sequence; episode `k` reads entry `k - 1`.
    List(Vec<Vec<f64>>),
    /// Independent uniform draws, reproducible per `(seed, k)`.
    Uniform { seed: u64 },
}

/// A finite-horizon MDP `(S, A, H, P, r)` with `S = [0,1]^state_dim` and
/// `A = [0,1]^action_dim`.
#[derive(Clone)]
pub struct Environment {
    pub name: String,
    pub horizon: usize,
    pub metric: MetricSpec,
    pub state_dim: usize,
    pub action_dim: usize,
    pub lipschitz_hint: f64,
    pub initial: InitialStates,
    reward: RewardFn,
    kernel: Kernel,
}

impl fmt::Debug for Environment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Environment")
            .field("name", &self.name)
            .field("horizon", &self.horizon)
            .field("metric", &self.metric)
            .field("state_dim", &self.state_dim)
            .field("action_dim", &self.action_dim)
            .field("lipschitz_hint", &self.lipschitz_hint)
            .field("initial", &self.initial)
            .field("kernel", &self.kernel)
            .finish()
    }
}

fn in_box(v: &[f64]) -> bool {
    v.iter().all(|c| c.is_finite() && (0.0..=1.0).contains(c))
}

impl Environment {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        horizon: usize,
        metric: MetricSpec,
        state_dim: usize,
        action_dim: usize,
        lipschitz_hint: f64,
        initial: InitialStates,
        reward: RewardFn,
        kernel: Kernel,
    ) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::invalid("horizon must be at least 1"));
        }
        if state_dim == 0 || action_dim == 0 {
            return Err(Error::invalid("state and action dimensions must be positive"));
        }
        if !(metric.d_max > 0.0) || !(lipschitz_hint >= 0.0) {
            return Err(Error::invalid("d_max must be positive and the Lipschitz hint non-negative"));
        }
        Ok(Environment {
            name: name.into(),
            horizon,
            metric,
            state_dim,
            action_dim,
            lipschitz_hint,
            initial,
            reward,
            kernel,
        })
    }

    /// Look up a shipped benchmark by name.
    pub fn by_name(name: &str, horizon: Option<usize>, seed: u64) -> Result<Self> {
        bench::by_name(name, horizon, seed)
    }

    pub fn d_max(&self) -> f64 {
        self.metric.d_max
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn with_initial(mut self, initial: InitialStates) -> Self {
        self.initial = initial;
        self
    }

    /// Initial state of episode `k` (1-based).
    pub fn reset(&self, k: usize) -> Vec<f64> {
        match &self.initial {
            InitialStates::Fixed(x) => x.clone(),
            InitialStates::Sweep { episodes } => {
                let t = if *episodes <= 1 {
                    0.0
                } else {
                    (k.saturating_sub(1) as f64 / (*episodes - 1) as f64).min(1.0)
                };
                vec![t; self.state_dim]
            }
            InitialStates::List(list) => {
                let i = k.saturating_sub(1).min(list.len().saturating_sub(1));
                list[i].clone()
            }
            InitialStates::Uniform { seed } => {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
                (0..self.state_dim).map(|_| rng.gen::<f64>()).collect()
            }
        }
    }

    /// Deterministic reward of `(x, a)` at stage `h`.
    pub fn reward(&self, h: usize, x: &[f64], a: &[f64]) -> f64 {
        (self.reward)(h, x, a)
    }

    /// One transition. Randomness comes only from `rng`.
    pub fn step(&self, h: usize, x: &[f64], a: &[f64], rng: &mut dyn RngCore) -> Result<(f64, Vec<f64>)> {
        if h == 0 || h > self.horizon {
            return Err(Error::invalid(format!("stage {h} outside 1..={}", self.horizon)));
        }
        if x.len() != self.state_dim || a.len() != self.action_dim {
            return Err(Error::invalid("state/action dimension mismatch"));
        }
        if !in_box(x) || !in_box(a) {
            return Err(Error::invalid(format!("state {x:?} or action {a:?} outside the unit box")));
        }
        let reward = self.reward(h, x, a);
        if !(0.0..=1.0).contains(&reward) {
            return Err(Error::invariant(format!("reward {reward} outside [0, 1]")));
        }
        let next = match &self.kernel {
            Kernel::Deterministic(f) => f(h, x, a),
            Kernel::UniformNoise { mean, width } => mean(h, x, a)
                .into_iter()
                .map(|m| (m + width * (rng.gen::<f64>() - 0.5)).clamp(0.0, 1.0))
                .collect(),
            Kernel::Sampled { sampler, .. } => sampler(h, x, a, rng),
        };
        if next.len() != self.state_dim || !in_box(&next) {
            return Err(Error::invariant(format!("kernel produced {next:?} outside the state box")));
        }
        Ok((reward, next))
    }
}
