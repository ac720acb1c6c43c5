//! Adaptive Q-learning for episodic reinforcement learning over metric
//! state-action spaces.
//!
//! The crate is organised around a few layers:
//!
//! - [`metric`]: product and joint metrics, nets, packings and diameters over
//!   finite witness point sets.
//! - [`env`]: finite-horizon benchmark MDPs on the unit box, plus the grid
//!   oracle that provides ground-truth `Q*`, `V*` and gaps.
//! - [`agent`]: the adaptive ball-partition learner and the fixed-net
//!   baseline, sharing one update rule.
//! - [`diagnostics`]: near-optimal sets, zooming and covering profiles,
//!   learning-rate weights, surplus clipping, regret and the theorem bound.
//! - [`harness`]: seeded experiment runs with on-disk artifacts.

pub mod agent;
pub mod diagnostics;
pub mod env;
pub mod error;
pub mod harness;
pub mod metric;

pub use error::{Error, Result};
