//! Fixed `eps`-net baseline.

use std::sync::Arc;

use rand::RngCore;
use serde::Serialize;

use super::{Agent, AgentConfig, EpisodeLog, WitnessGrid};
use crate::env::Environment;
use crate::error::{Error, Result};
use crate::metric::{greedy_net, PointCloud};

/// A fixed ball set of radius `eps = d_max / 2^depth`, shared by every stage.
#[derive(Debug, Clone, Serialize)]
pub struct UniformPartition {
    pub eps: f64,
    pub depth: u32,
    /// Joint coordinates of the ball centers.
    pub centers: Vec<Vec<f64>>,
    #[serde(skip)]
    pub(crate) grid: Arc<WitnessGrid>,
}

impl UniformPartition {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn grid(&self) -> &WitnessGrid {
        &self.grid
    }
}

/// Greedy `eps`-net of the whole witness grid.
///
/// The traversal is seeded at the center of the box rather than at a
/// corner, so that `eps = d_max` yields the single ball that covers the box.
/// `eps` must be a dyadic fraction `d_max / 2^i` of the diameter.
pub fn build_uniform(eps: f64, grid: Arc<WitnessGrid>) -> Result<UniformPartition> {
    let d_max = grid.metric.d_max;
    if !(eps > 0.0 && eps <= d_max) {
        return Err(Error::usage("eps", format!("{eps} is outside (0, d_max]")));
    }
    let depth = (d_max / eps).log2().round();
    if (d_max / f64::powi(2.0, depth as i32) - eps).abs() > 1e-12 * d_max {
        return Err(Error::usage("eps", format!("{eps} is not of the form d_max / 2^i")));
    }
    let depth = depth as u32;
    if eps < 2.0 * grid.spacing() {
        return Err(Error::usage(
            "eps",
            format!("{eps} is finer than the witness grid supports (spacing {})", grid.spacing()),
        ));
    }
    let center = grid.flatten(&vec![grid.intervals as u32 / 2; grid.dim()]);
    let order: Vec<usize> = std::iter::once(center)
        .chain((0..grid.len()).filter(|&p| p != center))
        .collect();
    let mut cloud = PointCloud::with_capacity(grid.state_dim, grid.action_dim, order.len());
    for &p in &order {
        cloud.push_row(&grid.joint_coords(p));
    }
    let net = greedy_net(&cloud, eps, &grid.metric)?;
    let centers = net.into_iter().map(|i| cloud.row(i).to_vec()).collect();
    Ok(UniformPartition {
        eps,
        depth,
        centers,
        grid,
    })
}

/// Run `config.episodes` episodes of the fixed-net learner.
pub fn run_uniform(
    env: &Environment,
    partition: &UniformPartition,
    config: &AgentConfig,
    rng: &mut dyn RngCore,
) -> Result<(Agent, Vec<EpisodeLog>)> {
    let mut agent = Agent::uniform(config.clone(), env, partition)?;
    let logs = agent.run(env, rng)?;
    Ok((agent, logs))
}
